#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ppe {

enum class Method { ls, cm, ls_augmented };

std::string to_string(Method m);

/// Estimated gamma'(z) = gamma(z) P(z) per grid position plus derived power.
struct ProfileEstimate {
  Method method = Method::ls;
  bool dual_pol = false;
  bool arbitrary_units = false;  // CM profiles are un-inverted correlations

  double dz_m = 0.0;
  std::vector<double> z_m;
  std::vector<double> gamma_per_w_m;  // fiber gamma at each position
  std::vector<double> gamma_prime;    // 1/m
  std::vector<double> gamma_prime_std;
  std::vector<double> power_dbm;
  std::vector<double> std_db;

  std::size_t frames = 0;
  std::size_t profiles_averaged = 1;
  std::vector<std::uint64_t> seeds;

  double normal_condition = 0.0;  // condition estimate of Re[G^H G]
  double cond_g = 0.0;            // sqrt of the above: condition of G
  bool stable = true;             // cond_g below the stability threshold
};

/// Lower clamp applied before converting non-positive estimates to dBm.
inline constexpr double kPowerFloorW = 1e-9;

/// Recomputes power_dbm from gamma_prime: P = gamma'/gamma (single-pol) or
/// 9 gamma' / (8 gamma) (dual-pol Manakov). `apply_manakov_factor = false`
/// reproduces the uncorrected dual-pol reading.
void derive_power(ProfileEstimate& estimate, bool apply_manakov_factor = true);

}  // namespace ppe
