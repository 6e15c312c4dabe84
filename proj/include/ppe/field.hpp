#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "ppe/units.hpp"

namespace ppe {

using cplx = std::complex<double>;
using Samples = std::vector<cplx>;

/// Uniformly sampled complex baseband waveform of one polarization.
///
/// Samples are dimensionless: the physical power lives in the position-wise
/// nonlinear coefficient, so a field is normally kept at unit mean power.
class ComplexField {
 public:
  ComplexField(Samples samples, double sample_period_s, double center_frequency_hz = kDefaultCarrierHz);

  std::span<const cplx> samples() const { return samples_; }
  const Samples& data() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double sample_period() const { return sample_period_; }
  double sample_rate() const { return 1.0 / sample_period_; }
  double center_frequency() const { return center_frequency_; }

  double mean_power() const;
  ComplexField normalized() const;
  ComplexField with_samples(Samples samples) const;

 private:
  Samples samples_;
  double sample_period_;
  double center_frequency_;
};

/// x/y polarization pair sharing one time base. Normalized means the
/// combined mean power |x|^2 + |y|^2 is one.
class DualPolField {
 public:
  DualPolField(ComplexField x, ComplexField y);

  const ComplexField& x() const { return x_; }
  const ComplexField& y() const { return y_; }
  std::size_t size() const { return x_.size(); }
  double sample_period() const { return x_.sample_period(); }
  double center_frequency() const { return x_.center_frequency(); }

  double mean_power() const { return x_.mean_power() + y_.mean_power(); }
  DualPolField normalized() const;

 private:
  ComplexField x_;
  ComplexField y_;
};

using Field = std::variant<ComplexField, DualPolField>;

// Rail view used by the numerical kernels: one vector per polarization.
struct Rails {
  std::vector<Samples> rails;
  double sample_period = 0.0;
  double center_frequency = kDefaultCarrierHz;

  std::size_t size() const { return rails.empty() ? 0 : rails.front().size(); }
  bool dual_pol() const { return rails.size() == 2; }
};

Rails to_rails(const Field& field);
Field from_rails(Rails rails);
bool is_dual_pol(const Field& field);
std::size_t field_size(const Field& field);
double field_sample_period(const Field& field);
double field_mean_power(const Field& field);

}  // namespace ppe
