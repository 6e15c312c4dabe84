#pragma once

#include <span>
#include <vector>

#include "ppe/field.hpp"
#include "ppe/link.hpp"

namespace ppe {

enum class Direction { forward, inverse };

/// Piecewise-constant dispersion segment.
struct DispersionSegment {
  double length_m = 0.0;
  double beta2_s2_per_m = 0.0;
  double beta3_s3_per_m = 0.0;
};

/// Chromatic-dispersion operator D_{z1 z2}: a diagonal spectral phase
/// exp(-j(b2/2) w^2 - j(b3/6) w^3) built from the accumulated b2, b3.
class CdOperator {
 public:
  CdOperator() = default;
  CdOperator(double from_z_m, double to_z_m, std::vector<DispersionSegment> segments);

  /// Operator for [from, to] along a link; to < from yields the reverse operator.
  static CdOperator along(const LinkSpec& link, double from_z_m, double to_z_m);

  double from_z() const { return from_z_; }
  double to_z() const { return to_z_; }
  double accumulated_beta2() const { return acc_beta2_; }
  double accumulated_beta3() const { return acc_beta3_; }

  /// this (z1->z2) followed by next (z2->z3).
  CdOperator then(const CdOperator& next) const;

 private:
  double from_z_ = 0.0;
  double to_z_ = 0.0;
  double acc_beta2_ = 0.0;
  double acc_beta3_ = 0.0;
};

/// Multiplies a spectrum (FFT order) by the CD phase. Conjugate phase for inverse.
void apply_cd_phase(std::span<cplx> spectrum, std::span<const double> omega, double acc_beta2, double acc_beta3,
                    Direction direction = Direction::forward);

/// Cyclic (whole-frame) application in the time domain.
void apply_cd_inplace(std::span<cplx> samples, double sample_period_s, double acc_beta2, double acc_beta3,
                      Direction direction = Direction::forward);

ComplexField apply_cd(const ComplexField& field, const CdOperator& op, Direction direction = Direction::forward);
DualPolField apply_cd(const DualPolField& field, const CdOperator& op, Direction direction = Direction::forward);
Field apply_cd(const Field& field, const CdOperator& op, Direction direction = Direction::forward);

/// CD memory in samples, |acc beta2| * 2 pi * BW / T, rounded up.
std::size_t cd_memory_samples(double abs_acc_beta2, double bandwidth_hz, double sample_period_s);

}  // namespace ppe
