#include "ppe/theoretical_profile.hpp"

#include <cmath>
#include <stdexcept>

#include "ppe/units.hpp"

namespace ppe {

TheoreticalProfile theoretical_profile(const LinkSpec& link, std::span<const double> z_grid_m) {
  TheoreticalProfile out;
  const double tol = 1e-9 * link.total_length_m();
  for (double z : z_grid_m) {
    if (z < -tol || z > link.total_length_m() + tol) throw std::invalid_argument("profile grid outside [0, L]");
    const double p = link.power_w_at(z);
    out.z_m.push_back(z);
    out.power_dbm.push_back(watts_to_dbm(p));
    out.gamma_prime.push_back(link.gamma_at(z) * p);
  }
  return out;
}

std::vector<double> uniform_grid(double length_m, double dz_m) {
  if (!(dz_m > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  const auto k = static_cast<std::size_t>(std::llround(length_m / dz_m));
  std::vector<double> z(k);
  for (std::size_t i = 0; i < k; ++i) z[i] = static_cast<double>(i) * dz_m;
  return z;
}

}  // namespace ppe
