#pragma once

#include <complex>
#include <span>

#include "ppe/perturbation.hpp"
#include "ppe/profile_estimate.hpp"

namespace ppe {

/// Condition number of G above which estimation is considered unstable.
inline constexpr double kStableConditionThreshold = 19952.623149688796;  // 10^4.3
/// Condition estimate of Re[G^H G] treated as numerically singular.
inline constexpr double kSingularNormalCondition = 1e12;

struct SolveOptions {
  double ridge = 0.0;  // Tikhonov term added to the diagonal, off by default
  double singular_threshold = kSingularNormalCondition;
  double stability_threshold = kStableConditionThreshold;
};

/// gamma' = (Re[G^H G])^{-1} Re[G^H A1] through a pivoted LDL^T factorization.
/// Throws SingularSystemError when the normal matrix is numerically singular.
ProfileEstimate solve_ls(const PerturbationSystem& system, const SolveOptions& opts = {});

/// Correlation-method profile Re[G^H A1], no inverse applied.
ProfileEstimate solve_cm(const PerturbationSystem& system);

/// Complex system for H = [G A0] with the raw rx as right-hand side.
class AugmentedSystem {
 public:
  AugmentedSystem(EstimationGrid grid, bool dual_pol);
  void accumulate(const PerturbationMatrix& g, const Eigen::VectorXcd& a0, const Eigen::VectorXcd& rx);

  const EstimationGrid& grid() const { return grid_; }
  bool dual_pol() const { return dual_pol_; }
  const Eigen::MatrixXcd& normal_matrix() const { return normal_; }
  const Eigen::VectorXcd& rhs() const { return rhs_; }
  std::size_t frames() const { return frames_; }

 private:
  EstimationGrid grid_;
  bool dual_pol_;
  Eigen::MatrixXcd normal_;
  Eigen::VectorXcd rhs_;
  std::size_t frames_ = 0;
};

struct AugmentedEstimate {
  ProfileEstimate profile;
  std::complex<double> scale;  // fitted complex factor c
};

/// Solves (H^H H) gamma'' = H^H rx, gamma'' = c [gamma'; 1], and returns
/// Re(gamma''[0..K) / c) together with c.
AugmentedEstimate solve_ls_augmented(const AugmentedSystem& system, const SolveOptions& opts = {});

/// Element-wise mean of gamma' with per-position standard deviation.
ProfileEstimate average_profiles(std::span<const ProfileEstimate> estimates);

}  // namespace ppe
