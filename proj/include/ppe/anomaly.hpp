#pragma once

#include <span>
#include <vector>

#include "ppe/link.hpp"
#include "ppe/metrics.hpp"
#include "ppe/profile_estimate.hpp"

namespace ppe {

/// Forward difference (y_k - y_{k+1}) / dz, K-1 values. Loss events show up
/// as positive peaks located between z_k and z_{k+1}.
std::vector<double> profile_derivative(std::span<const double> values, double dz_m);
std::vector<double> profile_derivative(const ProfileEstimate& profile);
/// Positions of the derivative samples: midpoints of neighbouring grid points.
std::vector<double> derivative_positions(const ProfileEstimate& profile);

struct Peak {
  std::size_t index = 0;
  double z_m = 0.0;
  double value = 0.0;
  double prominence = 0.0;
};

/// Local maxima with value >= min_height and topographic prominence >=
/// min_prominence, sorted by position.
std::vector<Peak> find_peaks(std::span<const double> y, std::span<const double> z_m, double min_height,
                             double min_prominence);

enum class SigmaMode {
  fixed,         // sigma given explicitly
  global_rms,    // RMS of the profile against the theoretical oracle
  prior_window,  // RMS of the residual over a window preceding each position
};

enum class TiltMode {
  nominal,  // configured launch power and alpha per span
  fitted,   // least-squares line per span, refitted once without detected steps
};

struct AnomalyOptions {
  SigmaMode sigma_mode = SigmaMode::fixed;
  double sigma_db = 0.18;
  double threshold_factor = 4.0;
  double dead_zone_m = kDeadZoneM;
  double step_window_m = 2000.0;     // half-window of the residual step statistic
  double step_gap_m = 500.0;         // left out on each side of a candidate step
  double prior_window_m = 18000.0;   // used by SigmaMode::prior_window
  double prior_gap_m = 1000.0;       // gap between the prior window and the position
  TiltMode tilt = TiltMode::nominal;
  // raise the threshold where the frame spread of an averaged profile makes
  // the step statistic itself uncertain (low-power ends of spans)
  bool use_profile_spread = true;
};

struct AnomalyEvent {
  double z_m = 0.0;
  double estimated_loss_db = 0.0;
  double step_db = 0.0;  // step statistic at detection
};

struct AnomalyReport {
  std::vector<AnomalyEvent> events;
  double sigma_db = 0.0;  // basis sigma (max over positions for prior_window)
  double threshold_db = 0.0;
  std::vector<double> z_m;
  std::vector<double> residual_db;  // tilt-subtracted profile
  std::vector<double> step_db;      // mean(after) - mean(before), 0 where undefined
  std::vector<bool> excluded;       // dead-zone membership
};

/// Subtracts the expected tilt, flags drops of the residual whose two-window
/// step exceeds threshold_factor * sigma outside the dead zones and estimates
/// each loss from the mean residual between the event and the next event or
/// amplifier. Throws std::invalid_argument for sigma <= 0.
AnomalyReport detect_anomalies(const ProfileEstimate& profile, const LinkSpec& link, const AnomalyOptions& opts = {});

/// Mean residual after minus before `z_m` over [z - window, z - gap] and
/// [z + gap, z + window]; the measured size of a step in the residual.
double residual_step_at(const AnomalyReport& report, double z_m, double window_m, double gap_m);

}  // namespace ppe
