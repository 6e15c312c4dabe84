#include "ppe/dispersion.hpp"

#include <cmath>
#include <stdexcept>

#include "ppe/fft.hpp"

namespace ppe {

CdOperator::CdOperator(double from_z_m, double to_z_m, std::vector<DispersionSegment> segments)
    : from_z_(from_z_m), to_z_(to_z_m) {
  for (const auto& s : segments) {
    acc_beta2_ += s.beta2_s2_per_m * s.length_m;
    acc_beta3_ += s.beta3_s3_per_m * s.length_m;
  }
}

CdOperator CdOperator::along(const LinkSpec& link, double from_z_m, double to_z_m) {
  CdOperator op;
  op.from_z_ = from_z_m;
  op.to_z_ = to_z_m;
  op.acc_beta2_ = link.accumulated_beta2(from_z_m, to_z_m);
  op.acc_beta3_ = link.accumulated_beta3(from_z_m, to_z_m);
  return op;
}

CdOperator CdOperator::then(const CdOperator& next) const {
  CdOperator op;
  op.from_z_ = from_z_;
  op.to_z_ = next.to_z_;
  op.acc_beta2_ = acc_beta2_ + next.acc_beta2_;
  op.acc_beta3_ = acc_beta3_ + next.acc_beta3_;
  return op;
}

void apply_cd_phase(std::span<cplx> spectrum, std::span<const double> omega, double acc_beta2, double acc_beta3,
                    Direction direction) {
  if (spectrum.size() != omega.size()) throw std::invalid_argument("CD phase: spectrum/grid size mismatch");
  if (acc_beta2 == 0.0 && acc_beta3 == 0.0) return;
  const double sign = direction == Direction::forward ? -1.0 : 1.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double w = omega[k];
    const double phase = sign * (0.5 * acc_beta2 * w * w + acc_beta3 / 6.0 * w * w * w);
    spectrum[k] *= cplx(std::cos(phase), std::sin(phase));
  }
}

void apply_cd_inplace(std::span<cplx> samples, double sample_period_s, double acc_beta2, double acc_beta3,
                      Direction direction) {
  if (acc_beta2 == 0.0 && acc_beta3 == 0.0) return;
  const auto plan = fft_plan(samples.size());
  const auto omega = angular_frequencies(samples.size(), sample_period_s);
  plan->forward(samples);
  apply_cd_phase(samples, omega, acc_beta2, acc_beta3, direction);
  plan->inverse(samples);
}

ComplexField apply_cd(const ComplexField& field, const CdOperator& op, Direction direction) {
  Samples s(field.data());
  apply_cd_inplace(s, field.sample_period(), op.accumulated_beta2(), op.accumulated_beta3(), direction);
  return field.with_samples(std::move(s));
}

DualPolField apply_cd(const DualPolField& field, const CdOperator& op, Direction direction) {
  return DualPolField(apply_cd(field.x(), op, direction), apply_cd(field.y(), op, direction));
}

Field apply_cd(const Field& field, const CdOperator& op, Direction direction) {
  return std::visit([&](const auto& f) -> Field { return apply_cd(f, op, direction); }, field);
}

std::size_t cd_memory_samples(double abs_acc_beta2, double bandwidth_hz, double sample_period_s) {
  const double t = std::abs(abs_acc_beta2) * 2.0 * kPi * bandwidth_hz;
  return static_cast<std::size_t>(std::ceil(t / sample_period_s));
}

}  // namespace ppe
