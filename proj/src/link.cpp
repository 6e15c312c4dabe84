#include "ppe/link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppe/errors.hpp"
#include "ppe/units.hpp"

namespace ppe {

SpanSpec SpanSpec::from_conventional(double length_km, double alpha_db_per_km, double beta2_ps2_per_km,
                                     double beta3_ps3_per_km, double gamma_per_w_km, double launch_power_dbm) {
  SpanSpec s;
  s.length_m = km_to_m(length_km);
  s.alpha_per_m = alpha_to_per_meter(alpha_db_per_km);
  s.beta2_s2_per_m = ps2_per_km_to_s2_per_m(beta2_ps2_per_km);
  s.beta3_s3_per_m = ps3_per_km_to_s3_per_m(beta3_ps3_per_km);
  s.gamma_per_w_m = per_w_km_to_per_w_m(gamma_per_w_km);
  s.launch_power_w = dbm_to_watts(launch_power_dbm);
  return s;
}

void SpanSpec::validate() const {
  if (!(length_m > 0.0)) throw ConfigError("span length must be positive");
  if (!(alpha_per_m >= 0.0)) throw ConfigError("span attenuation must be non-negative");
  if (!(gamma_per_w_m >= 0.0)) throw ConfigError("span nonlinear coefficient must be non-negative");
  if (!(launch_power_w > 0.0)) throw ConfigError("span launch power must be positive");
  if (!std::isfinite(beta2_s2_per_m) || !std::isfinite(beta3_s3_per_m))
    throw ConfigError("span dispersion must be finite");
  if (!(amplifier.noise_figure_db >= 0.0 || std::isinf(amplifier.noise_figure_db)))
    throw ConfigError("noise figure must be non-negative");
}

LinkSpec::LinkSpec(std::vector<SpanSpec> spans, std::vector<PointLoss> point_losses, double tx_power_w)
    : spans_(std::move(spans)), point_losses_(std::move(point_losses)), tx_power_w_(tx_power_w) {
  if (spans_.empty()) throw ConfigError("a link needs at least one span");
  if (!(tx_power_w_ > 0.0)) throw ConfigError("transmitter power must be positive");
  for (const auto& s : spans_) {
    s.validate();
    starts_.push_back(total_length_m_);
    total_length_m_ += s.length_m;
  }
  for (const auto& p : point_losses_) {
    if (!(p.position_m > 0.0 && p.position_m < total_length_m_))
      throw ConfigError("point loss position lies outside the link");
    if (!(p.attenuation_db >= 0.0)) throw ConfigError("point loss attenuation must be non-negative");
  }
  std::sort(point_losses_.begin(), point_losses_.end(),
            [](const PointLoss& a, const PointLoss& b) { return a.position_m < b.position_m; });

  double input = tx_power_w_;
  for (std::size_t i = 0; i < spans_.size(); ++i) {
    const auto& s = spans_[i];
    const double launch =
        s.amplifier.mode == GainMode::restore_to_launch ? s.launch_power_w : input * db_to_linear(s.amplifier.fixed_gain_db);
    amp_input_w_.push_back(input);
    launch_w_.push_back(launch);
    const double end_db = watts_to_dbm(launch) - alpha_to_db_per_km(s.alpha_per_m) * m_to_km(s.length_m) -
                          point_loss_db_between(starts_[i], starts_[i] + s.length_m);
    input = dbm_to_watts(end_db);
  }
}

std::size_t LinkSpec::span_index_at(double z_m) const {
  if (z_m <= 0.0) return 0;
  auto it = std::upper_bound(starts_.begin(), starts_.end(), z_m);
  return static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
}

double LinkSpec::point_loss_db_between(double z1_exclusive, double z2_inclusive) const {
  double db = 0.0;
  for (const auto& p : point_losses_)
    if (p.position_m > z1_exclusive && p.position_m <= z2_inclusive) db += p.attenuation_db;
  return db;
}

double LinkSpec::power_w_at(double z_m) const {
  const std::size_t i = span_index_at(std::clamp(z_m, 0.0, total_length_m_));
  const double start = starts_[i];
  const double dz = std::clamp(z_m, start, start + spans_[i].length_m) - start;
  const double db = watts_to_dbm(launch_w_[i]) - alpha_to_db_per_km(spans_[i].alpha_per_m) * m_to_km(dz) -
                    point_loss_db_between(start, start + dz);
  return dbm_to_watts(db);
}

double LinkSpec::gamma_at(double z_m) const { return spans_[span_index_at(z_m)].gamma_per_w_m; }

double LinkSpec::integrate(double z1, double z2, double SpanSpec::*member) const {
  const double sign = z2 >= z1 ? 1.0 : -1.0;
  const double lo = std::clamp(std::min(z1, z2), 0.0, total_length_m_);
  const double hi = std::clamp(std::max(z1, z2), 0.0, total_length_m_);
  double acc = 0.0;
  for (std::size_t i = 0; i < spans_.size(); ++i) {
    const double a = std::max(lo, starts_[i]);
    const double b = std::min(hi, starts_[i] + spans_[i].length_m);
    if (b > a) acc += (b - a) * (spans_[i].*member);
  }
  return sign * acc;
}

double LinkSpec::accumulated_beta2(double z1_m, double z2_m) const {
  return integrate(z1_m, z2_m, &SpanSpec::beta2_s2_per_m);
}

double LinkSpec::accumulated_beta3(double z1_m, double z2_m) const {
  return integrate(z1_m, z2_m, &SpanSpec::beta3_s3_per_m);
}

double LinkSpec::max_abs_accumulated_beta2() const {
  double acc = 0.0;
  for (const auto& s : spans_) acc += std::abs(s.beta2_s2_per_m) * s.length_m;
  return acc;
}

LinkSpec LinkSpec::with_point_losses(std::vector<PointLoss> losses) const {
  return LinkSpec(spans_, std::move(losses), tx_power_w_);
}

}  // namespace ppe
