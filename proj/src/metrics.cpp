#include "ppe/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ppe {

std::vector<double> span_edges(const LinkSpec& link) {
  std::vector<double> e{0.0};
  for (std::size_t i = 0; i < link.spans().size(); ++i) e.push_back(link.span_end_m(i));
  return e;
}

bool in_dead_zone(double z_m, std::span<const double> edges_m, double half_width_m) {
  for (double e : edges_m)
    if (std::abs(z_m - e) <= half_width_m) return true;
  return false;
}

namespace {

std::vector<double> differences(std::span<const double> z_m, std::span<const double> est,
                                std::span<const double> oracle, std::span<const double> edges, double dz) {
  if (z_m.size() != est.size() || z_m.size() != oracle.size()) throw std::invalid_argument("profile length mismatch");
  std::vector<double> d;
  for (std::size_t k = 0; k < z_m.size(); ++k)
    if (!in_dead_zone(z_m[k], edges, dz)) d.push_back(est[k] - oracle[k]);
  if (d.empty()) throw std::invalid_argument("no positions left outside the dead zones");
  return d;
}

std::vector<double> differences(const ProfileEstimate& e, const LinkSpec& link, double dz) {
  const auto th = theoretical_profile(link, e.z_m);
  const auto edges = span_edges(link);
  return differences(e.z_m, e.power_dbm, th.power_dbm, edges, dz);
}

double rms(const std::vector<double>& d, double offset = 0.0) {
  double s = 0.0;
  for (double v : d) s += (v - offset) * (v - offset);
  return std::sqrt(s / static_cast<double>(d.size()));
}

double mean(const std::vector<double>& d) {
  double s = 0.0;
  for (double v : d) s += v;
  return s / static_cast<double>(d.size());
}

}  // namespace

double profile_rms_error(std::span<const double> z_m, std::span<const double> estimate_db,
                         std::span<const double> oracle_db, std::span<const double> edges_m, double dead_zone_m) {
  return rms(differences(z_m, estimate_db, oracle_db, edges_m, dead_zone_m));
}

double profile_rms_error(const ProfileEstimate& estimate, const LinkSpec& link, double dead_zone_m) {
  return rms(differences(estimate, link, dead_zone_m));
}

double mean_offset_db(const ProfileEstimate& estimate, const LinkSpec& link, double dead_zone_m) {
  return mean(differences(estimate, link, dead_zone_m));
}

double calibrated_rms_error(const ProfileEstimate& estimate, const LinkSpec& link, double dead_zone_m) {
  const auto d = differences(estimate, link, dead_zone_m);
  return rms(d, mean(d));
}

}  // namespace ppe
