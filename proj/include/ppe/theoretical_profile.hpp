#pragma once

#include <span>
#include <vector>

#include "ppe/link.hpp"

namespace ppe {

/// Exact piecewise-exponential power profile of a link: amplifier steps up
/// at span starts, point losses step down, log-linear decay in between.
struct TheoreticalProfile {
  std::vector<double> z_m;
  std::vector<double> power_dbm;
  std::vector<double> gamma_prime;  // gamma(z) P(z), 1/m
};

TheoreticalProfile theoretical_profile(const LinkSpec& link, std::span<const double> z_grid_m);

/// Uniform grid z_k = k dz, k = 0..K-1 with K = round(L / dz).
std::vector<double> uniform_grid(double length_m, double dz_m);

}  // namespace ppe
