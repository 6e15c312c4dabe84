#pragma once

#include <numbers>

namespace ppe {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPlanck = 6.62607015e-34;       // J*s
inline constexpr double kDefaultCarrierHz = 193.4e12;

double db_to_linear(double db);
double linear_to_db(double ratio);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Power attenuation coefficient in natural units: P(z) = P(0) exp(-alpha z), z in meters.
double alpha_to_per_meter(double alpha_db_per_km);
double alpha_to_db_per_km(double alpha_per_m);

inline constexpr double ps2_per_km_to_s2_per_m(double v) { return v * 1e-24 / 1e3; }
inline constexpr double ps3_per_km_to_s3_per_m(double v) { return v * 1e-36 / 1e3; }
inline constexpr double s2_per_m_to_ps2_per_km(double v) { return v * 1e24 * 1e3; }
inline constexpr double per_w_km_to_per_w_m(double v) { return v / 1e3; }
inline constexpr double km_to_m(double v) { return v * 1e3; }
inline constexpr double m_to_km(double v) { return v / 1e3; }
inline constexpr double gbd_to_hz(double v) { return v * 1e9; }

}  // namespace ppe
