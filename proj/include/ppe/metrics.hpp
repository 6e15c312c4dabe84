#pragma once

#include <span>
#include <vector>

#include "ppe/link.hpp"
#include "ppe/profile_estimate.hpp"
#include "ppe/theoretical_profile.hpp"

namespace ppe {

inline constexpr double kDeadZoneM = 1000.0;

/// Fiber ends: 0, every span boundary and L.
std::vector<double> span_edges(const LinkSpec& link);
bool in_dead_zone(double z_m, std::span<const double> edges_m, double half_width_m);

/// RMS of (estimate - oracle) in dB over positions outside the dead zones.
/// Throws std::invalid_argument when nothing is left to compare.
double profile_rms_error(std::span<const double> z_m, std::span<const double> estimate_db,
                         std::span<const double> oracle_db, std::span<const double> edges_m,
                         double dead_zone_m = kDeadZoneM);
/// Oracle evaluated on the estimate's own grid.
double profile_rms_error(const ProfileEstimate& estimate, const LinkSpec& link, double dead_zone_m = kDeadZoneM);

/// Mean dB offset of estimate over oracle outside the dead zones.
double mean_offset_db(const ProfileEstimate& estimate, const LinkSpec& link, double dead_zone_m = kDeadZoneM);
/// RMS error after removing the best single dB offset (used for CM, whose
/// scale is arbitrary).
double calibrated_rms_error(const ProfileEstimate& estimate, const LinkSpec& link, double dead_zone_m = kDeadZoneM);

}  // namespace ppe
