#include "ppe/field.hpp"

#include <cmath>
#include <stdexcept>

namespace ppe {

namespace {

double mean_abs2(const Samples& s) {
  double acc = 0.0;
  for (const auto& v : s) acc += std::norm(v);
  return acc / static_cast<double>(s.size());
}

}  // namespace

ComplexField::ComplexField(Samples samples, double sample_period_s, double center_frequency_hz)
    : samples_(std::move(samples)), sample_period_(sample_period_s), center_frequency_(center_frequency_hz) {
  if (samples_.size() < 2) throw std::invalid_argument("ComplexField needs at least two samples");
  if (!(sample_period_ > 0.0) || !std::isfinite(sample_period_))
    throw std::invalid_argument("ComplexField sample period must be positive");
  for (const auto& v : samples_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("ComplexField contains non-finite samples");
  }
}

double ComplexField::mean_power() const { return mean_abs2(samples_); }

ComplexField ComplexField::normalized() const {
  const double p = mean_power();
  if (!(p > 0.0)) throw std::invalid_argument("cannot normalize a zero-power field");
  const double scale = 1.0 / std::sqrt(p);
  Samples out(samples_);
  for (auto& v : out) v *= scale;
  return with_samples(std::move(out));
}

ComplexField ComplexField::with_samples(Samples samples) const {
  return ComplexField(std::move(samples), sample_period_, center_frequency_);
}

DualPolField::DualPolField(ComplexField x, ComplexField y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size() || x_.sample_period() != y_.sample_period() ||
      x_.center_frequency() != y_.center_frequency())
    throw std::invalid_argument("DualPolField rails must share N, T and carrier frequency");
}

DualPolField DualPolField::normalized() const {
  const double p = mean_power();
  if (!(p > 0.0)) throw std::invalid_argument("cannot normalize a zero-power field");
  const double scale = 1.0 / std::sqrt(p);
  auto scaled = [scale](const ComplexField& f) {
    Samples s(f.data());
    for (auto& v : s) v *= scale;
    return f.with_samples(std::move(s));
  };
  return DualPolField(scaled(x_), scaled(y_));
}

Rails to_rails(const Field& field) {
  return std::visit(
      [](const auto& f) -> Rails {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ComplexField>) {
          return Rails{{f.data()}, f.sample_period(), f.center_frequency()};
        } else {
          return Rails{{f.x().data(), f.y().data()}, f.sample_period(), f.center_frequency()};
        }
      },
      field);
}

Field from_rails(Rails rails) {
  if (rails.rails.size() == 1)
    return ComplexField(std::move(rails.rails[0]), rails.sample_period, rails.center_frequency);
  if (rails.rails.size() == 2)
    return DualPolField(ComplexField(std::move(rails.rails[0]), rails.sample_period, rails.center_frequency),
                        ComplexField(std::move(rails.rails[1]), rails.sample_period, rails.center_frequency));
  throw std::invalid_argument("a field has one or two polarization rails");
}

bool is_dual_pol(const Field& field) { return std::holds_alternative<DualPolField>(field); }

std::size_t field_size(const Field& field) {
  return std::visit([](const auto& f) { return f.size(); }, field);
}

double field_sample_period(const Field& field) {
  return std::visit([](const auto& f) { return f.sample_period(); }, field);
}

double field_mean_power(const Field& field) {
  return std::visit([](const auto& f) { return f.mean_power(); }, field);
}

}  // namespace ppe
