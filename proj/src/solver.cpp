#include "ppe/solver.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppe/errors.hpp"
#include "ppe/units.hpp"

namespace ppe {

std::string to_string(Method m) {
  switch (m) {
    case Method::ls: return "LS";
    case Method::cm: return "CM";
    case Method::ls_augmented: return "LS-augmented";
  }
  return "?";
}

void derive_power(ProfileEstimate& e, bool apply_manakov_factor) {
  const double factor = e.dual_pol && apply_manakov_factor ? 9.0 / 8.0 : 1.0;
  e.power_dbm.resize(e.gamma_prime.size());
  e.std_db.assign(e.gamma_prime.size(), 0.0);
  for (std::size_t k = 0; k < e.gamma_prime.size(); ++k) {
    const double g = e.gamma_per_w_m[k];
    const double p = g > 0.0 ? factor * e.gamma_prime[k] / g : 0.0;
    e.power_dbm[k] = watts_to_dbm(std::max(p, kPowerFloorW));
    if (k < e.gamma_prime_std.size() && e.gamma_prime[k] != 0.0)
      e.std_db[k] = 10.0 / std::log(10.0) * e.gamma_prime_std[k] / std::abs(e.gamma_prime[k]);
  }
}

namespace {

ProfileEstimate skeleton(const EstimationGrid& grid, bool dual_pol, Method method, std::size_t frames) {
  ProfileEstimate e;
  e.method = method;
  e.dual_pol = dual_pol;
  e.dz_m = grid.dz_m;
  e.z_m = grid.z_m;
  e.gamma_per_w_m = grid.gamma_per_w_m;
  e.frames = frames;
  return e;
}

template <typename Matrix>
double condition_of(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0)) return std::numeric_limits<double>::infinity();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

void require_frames(std::size_t frames) {
  if (frames == 0) throw std::invalid_argument("no frames accumulated");
}

}  // namespace

ProfileEstimate solve_ls(const PerturbationSystem& system, const SolveOptions& opts) {
  require_frames(system.frames());
  Eigen::MatrixXd a = system.normal_matrix();
  if (opts.ridge > 0.0) a.diagonal().array() += opts.ridge;

  ProfileEstimate e = skeleton(system.grid(), system.dual_pol(), Method::ls, system.frames());
  e.normal_condition = condition_of(a);
  e.cond_g = std::sqrt(e.normal_condition);
  e.stable = e.cond_g < opts.stability_threshold;
  if (!(e.normal_condition <= opts.singular_threshold))
    throw SingularSystemError("normal matrix is numerically singular (condition estimate " +
                              std::to_string(e.normal_condition) +
                              "); the rank of G is reduced, e.g. by too fine a grid or weak/cancelling dispersion");

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SingularSystemError("LDL^T factorization of the normal matrix failed");
  const Eigen::VectorXd x = ldlt.solve(system.rhs());
  if (!x.allFinite()) throw SingularSystemError("normal-equation solution is not finite");
  e.gamma_prime.assign(x.data(), x.data() + x.size());
  derive_power(e);
  return e;
}

ProfileEstimate solve_cm(const PerturbationSystem& system) {
  require_frames(system.frames());
  ProfileEstimate e = skeleton(system.grid(), system.dual_pol(), Method::cm, system.frames());
  e.arbitrary_units = true;
  const auto& b = system.rhs();
  e.gamma_prime.assign(b.data(), b.data() + b.size());
  derive_power(e);
  return e;
}

AugmentedSystem::AugmentedSystem(EstimationGrid grid, bool dual_pol) : grid_(std::move(grid)), dual_pol_(dual_pol) {
  const auto k = static_cast<Eigen::Index>(grid_.size()) + 1;
  normal_ = Eigen::MatrixXcd::Zero(k, k);
  rhs_ = Eigen::VectorXcd::Zero(k);
}

void AugmentedSystem::accumulate(const PerturbationMatrix& g, const Eigen::VectorXcd& a0, const Eigen::VectorXcd& rx) {
  if (!(g.grid() == grid_) || g.dual_pol() != dual_pol_) throw std::invalid_argument("augmented system grid mismatch");
  const auto rows = static_cast<Eigen::Index>(g.complex_rows());
  if (a0.size() != rows || rx.size() != rows) throw std::invalid_argument("augmented system row mismatch");
  const auto k = static_cast<Eigen::Index>(g.columns());
  Eigen::MatrixXcd h(rows, k + 1);
  h.leftCols(k) = g.complex_matrix();
  h.col(k) = a0;
  normal_.noalias() += h.adjoint() * h;
  rhs_.noalias() += h.adjoint() * rx;
  ++frames_;
}

AugmentedEstimate solve_ls_augmented(const AugmentedSystem& system, const SolveOptions& opts) {
  require_frames(system.frames());
  Eigen::MatrixXcd a = system.normal_matrix();
  if (opts.ridge > 0.0) a.diagonal().array() += opts.ridge;
  AugmentedEstimate out;
  ProfileEstimate& e = out.profile;
  e = skeleton(system.grid(), system.dual_pol(), Method::ls_augmented, system.frames());
  e.normal_condition = condition_of(a);
  e.cond_g = std::sqrt(e.normal_condition);
  e.stable = e.cond_g < opts.stability_threshold;
  if (!(e.normal_condition <= opts.singular_threshold))
    throw SingularSystemError("augmented normal matrix is numerically singular");
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SingularSystemError("LDL^T factorization of the augmented system failed");
  const Eigen::VectorXcd x = ldlt.solve(system.rhs());
  const auto k = static_cast<Eigen::Index>(system.grid().size());
  out.scale = x[k];
  if (!(std::abs(out.scale) >= 1e-6)) throw SingularSystemError("degenerate complex scaling factor in augmented LS");
  e.gamma_prime.resize(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) e.gamma_prime[static_cast<std::size_t>(i)] = (x[i] / out.scale).real();
  derive_power(e);
  return out;
}

ProfileEstimate average_profiles(std::span<const ProfileEstimate> estimates) {
  if (estimates.empty()) throw std::invalid_argument("nothing to average");
  const ProfileEstimate& first = estimates.front();
  ProfileEstimate out = first;
  const std::size_t k = first.gamma_prime.size();
  for (const auto& e : estimates) {
    if (e.z_m != first.z_m || e.dz_m != first.dz_m) throw std::invalid_argument("cannot average profiles on different grids");
    if (e.method != first.method || e.dual_pol != first.dual_pol)
      throw std::invalid_argument("cannot average profiles of different methods");
  }
  const auto n = static_cast<double>(estimates.size());
  std::vector<double> mean(k, 0.0), var(k, 0.0);
  for (const auto& e : estimates)
    for (std::size_t i = 0; i < k; ++i) mean[i] += e.gamma_prime[i] / n;
  for (const auto& e : estimates)
    for (std::size_t i = 0; i < k; ++i) var[i] += (e.gamma_prime[i] - mean[i]) * (e.gamma_prime[i] - mean[i]);
  out.gamma_prime = mean;
  out.gamma_prime_std.assign(k, 0.0);
  if (estimates.size() > 1)
    for (std::size_t i = 0; i < k; ++i) out.gamma_prime_std[i] = std::sqrt(var[i] / (n - 1.0));
  out.frames = 0;
  out.seeds.clear();
  out.profiles_averaged = 0;
  out.stable = true;
  out.normal_condition = 0.0;
  for (const auto& e : estimates) {
    out.frames += e.frames;
    out.profiles_averaged += e.profiles_averaged;
    out.seeds.insert(out.seeds.end(), e.seeds.begin(), e.seeds.end());
    out.stable = out.stable && e.stable;
    out.normal_condition = std::max(out.normal_condition, e.normal_condition);
  }
  out.cond_g = std::sqrt(out.normal_condition);
  derive_power(out);
  return out;
}

}  // namespace ppe
