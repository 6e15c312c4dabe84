#include "ppe/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppe/dispersion.hpp"
#include "ppe/errors.hpp"
#include "ppe/fft.hpp"
#include "ppe/nonlinear.hpp"
#include "ppe/parallel.hpp"
#include "ppe/resample.hpp"
#include "ppe/theoretical_profile.hpp"

namespace ppe {

EstimationGrid EstimationGrid::uniform(const LinkSpec& link, double dz_m) {
  EstimationGrid g;
  g.dz_m = dz_m;
  g.z_m = uniform_grid(link.total_length_m(), dz_m);
  for (double z : g.z_m) g.gamma_per_w_m.push_back(link.gamma_at(z));
  return g;
}

std::size_t default_guard_samples(const LinkSpec& link, double bandwidth_hz, double sample_period_s) {
  return cd_memory_samples(link.max_abs_accumulated_beta2(), bandwidth_hz, sample_period_s);
}

Eigen::VectorXd real_stack(const Eigen::VectorXcd& v) {
  Eigen::VectorXd out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

Eigen::VectorXcd complex_unstack(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size() / 2;
  Eigen::VectorXcd out(m);
  out.real() = v.head(m);
  out.imag() = v.tail(m);
  return out;
}

PerturbationMatrix::PerturbationMatrix(EstimationGrid grid, bool dual_pol, Eigen::MatrixXd stacked)
    : grid_(std::move(grid)), dual_pol_(dual_pol), stacked_(std::move(stacked)) {
  if (static_cast<std::size_t>(stacked_.cols()) != grid_.size())
    throw std::invalid_argument("perturbation matrix column count differs from the grid");
}

Eigen::VectorXcd PerturbationMatrix::column(std::size_t k) const {
  return complex_unstack(stacked_.col(static_cast<Eigen::Index>(k)));
}

Eigen::MatrixXcd PerturbationMatrix::complex_matrix() const {
  const Eigen::Index m = stacked_.rows() / 2;
  Eigen::MatrixXcd out(m, stacked_.cols());
  out.real() = stacked_.topRows(m);
  out.imag() = stacked_.bottomRows(m);
  return out;
}

Eigen::VectorXcd PerturbationMatrix::apply(const Eigen::VectorXd& gamma) const {
  return complex_unstack(stacked_ * gamma);
}

namespace {

void require_grid(const EstimationGrid& grid) {
  if (grid.size() < 2) throw std::invalid_argument("perturbation matrix needs at least two positions");
}

std::size_t kept_rows(std::size_t n, std::size_t guard) {
  if (2 * guard >= n) throw std::invalid_argument("guard samples consume the whole frame");
  return n - 2 * guard;
}

}  // namespace

void for_each_g_column(const Field& tx, const LinkSpec& link, const EstimationGrid& grid, const GBuildOptions& opts,
                       std::size_t k_begin, std::size_t k_end, const ColumnSink& sink) {
  require_grid(grid);
  if (opts.nl_oversampling == 0) throw std::invalid_argument("nl_oversampling must be >= 1");
  const Rails r = to_rails(tx);
  const std::size_t n = r.size();
  const std::size_t m = n * opts.nl_oversampling;
  const std::size_t keep = kept_rows(n, opts.guard_samples);
  const std::size_t rails = r.rails.size();
  const auto omega = angular_frequencies(n, r.sample_period);
  const auto plan = fft_plan(n);
  const auto plan_up = fft_plan(m);
  const double length = link.total_length_m();

  std::vector<Samples> spectra = r.rails;
  for (auto& s : spectra) plan->forward(s);

  parallel_for(k_begin, k_end, [&](std::size_t k) {
    const double z = grid.z_m[k];
    const double b2_in = link.accumulated_beta2(0.0, z);
    const double b3_in = link.accumulated_beta3(0.0, z);
    const double b2_out = link.accumulated_beta2(z, length);
    const double b3_out = link.accumulated_beta3(z, length);

    std::vector<Samples> up(rails, Samples(m));
    for (std::size_t p = 0; p < rails; ++p) {
      Samples s(spectra[p]);
      apply_cd_phase(s, omega, b2_in, b3_in);
      resize_spectrum(s, up[p]);
      plan_up->inverse(up[p]);
    }
    if (rails == 1) nl_single_inplace(up[0]);
    else nl_dual_inplace(up[0], up[1]);

    Eigen::VectorXcd col(static_cast<Eigen::Index>(rails * keep));
    const cplx scale(0.0, -grid.dz_m);
    for (std::size_t p = 0; p < rails; ++p) {
      plan_up->forward(up[p]);
      Samples s(n);
      resize_spectrum(up[p], s);
      apply_cd_phase(s, omega, b2_out, b3_out);
      plan->inverse(s);
      for (std::size_t i = 0; i < keep; ++i) col[static_cast<Eigen::Index>(p * keep + i)] = scale * s[opts.guard_samples + i];
    }
    sink(k, col);
  });
}

PerturbationMatrix build_g(const Field& tx, const LinkSpec& link, const EstimationGrid& grid,
                           const GBuildOptions& opts) {
  require_grid(grid);
  const std::size_t rails = is_dual_pol(tx) ? 2 : 1;
  const auto rows = static_cast<Eigen::Index>(rails * kept_rows(field_size(tx), opts.guard_samples));
  Eigen::MatrixXd stacked(2 * rows, static_cast<Eigen::Index>(grid.size()));
  for_each_g_column(tx, link, grid, opts, 0, grid.size(), [&](std::size_t k, const Eigen::VectorXcd& c) {
    const auto j = static_cast<Eigen::Index>(k);
    stacked.col(j).head(rows) = c.real();
    stacked.col(j).tail(rows) = c.imag();
  });
  return PerturbationMatrix(grid, rails == 2, std::move(stacked));
}

namespace {

Eigen::VectorXcd stack_trimmed(const Rails& r, std::size_t guard) {
  const std::size_t keep = kept_rows(r.size(), guard);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(r.rails.size() * keep));
  for (std::size_t p = 0; p < r.rails.size(); ++p)
    for (std::size_t i = 0; i < keep; ++i) v[static_cast<Eigen::Index>(p * keep + i)] = r.rails[p][guard + i];
  return v;
}

Rails loaded_reference(const Field& tx, const LinkSpec& link) {
  Rails a0 = to_rails(tx);
  const double b2 = link.accumulated_beta2(0.0, link.total_length_m());
  const double b3 = link.accumulated_beta3(0.0, link.total_length_m());
  for (auto& rail : a0.rails) apply_cd_inplace(rail, a0.sample_period, b2, b3);
  return a0;
}

void check_compatible(const Field& rx, const Field& tx) {
  if (is_dual_pol(rx) != is_dual_pol(tx)) throw std::invalid_argument("rx and tx differ in polarization count");
  if (field_size(rx) != field_size(tx)) throw std::invalid_argument("rx and tx differ in length");
  if (std::abs(field_sample_period(rx) - field_sample_period(tx)) > 1e-9 * field_sample_period(tx))
    throw std::invalid_argument("rx and tx differ in sample period");
}

}  // namespace

ReceivedPerturbation form_a1(const Field& rx, const Field& tx, const LinkSpec& link, const A1Options& opts) {
  check_compatible(rx, tx);
  ReceivedPerturbation out;
  out.a0 = stack_trimmed(loaded_reference(tx, link), opts.guard_samples);
  out.rx = stack_trimmed(to_rails(rx), opts.guard_samples);
  if (opts.alignment == Alignment::common_phase) {
    const cplx c = out.a0.dot(out.rx);  // a0^H rx
    out.phase_rad = std::arg(c);
    out.rx *= std::polar(1.0, -out.phase_rad);
  }
  out.a1 = out.rx - out.a0;
  return out;
}

SyncResult synchronize(const Field& rx, const Field& tx, const LinkSpec& link, std::size_t max_lag,
                       double min_peak_ratio) {
  check_compatible(rx, tx);
  const Rails ref = loaded_reference(tx, link);
  const Rails r = to_rails(rx);
  const std::size_t n = r.size();
  const auto plan = fft_plan(n);
  std::vector<double> mag(n, 0.0);
  Samples corr_total(n, cplx{});
  for (std::size_t p = 0; p < r.rails.size(); ++p) {
    Samples a(r.rails[p]);
    Samples b(ref.rails[p]);
    plan->forward(a);
    plan->forward(b);
    for (std::size_t k = 0; k < n; ++k) a[k] *= std::conj(b[k]);
    plan->inverse(a);
    for (std::size_t k = 0; k < n; ++k) corr_total[k] += a[k];
  }
  double mean = 0.0;
  std::size_t best = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mag[k] = std::abs(corr_total[k]);
    mean += mag[k];
    if (mag[k] > mag[best]) best = k;
  }
  mean /= static_cast<double>(n);
  SyncResult res;
  res.lag = best < n / 2 ? static_cast<std::ptrdiff_t>(best) : static_cast<std::ptrdiff_t>(best) - static_cast<std::ptrdiff_t>(n);
  res.peak_ratio = mean > 0.0 ? mag[best] / mean : 0.0;
  if (!(res.peak_ratio >= min_peak_ratio))
    throw SyncError("no clear correlation peak between rx and the CD-loaded tx reference");
  if (static_cast<std::size_t>(std::abs(res.lag)) > max_lag)
    throw SyncError("synchronization lag " + std::to_string(res.lag) + " exceeds the search range");
  return res;
}

Field shift_field(const Field& field, std::ptrdiff_t lag) {
  Rails r = to_rails(field);
  const auto n = static_cast<std::ptrdiff_t>(r.size());
  const std::ptrdiff_t s = ((lag % n) + n) % n;
  for (auto& rail : r.rails) std::rotate(rail.begin(), rail.begin() + s, rail.end());
  return from_rails(std::move(r));
}

PerturbationSystem::PerturbationSystem(EstimationGrid grid, bool dual_pol) : grid_(std::move(grid)), dual_pol_(dual_pol) {
  const auto k = static_cast<Eigen::Index>(grid_.size());
  normal_ = Eigen::MatrixXd::Zero(k, k);
  rhs_ = Eigen::VectorXd::Zero(k);
}

void PerturbationSystem::check(const EstimationGrid& grid, bool dual_pol) const {
  if (!(grid == grid_)) throw std::invalid_argument("perturbation system grid mismatch");
  if (dual_pol != dual_pol_) throw std::invalid_argument("perturbation system polarization mismatch");
}

void PerturbationSystem::accumulate(const PerturbationMatrix& g, const Eigen::VectorXcd& a1) {
  check(g.grid(), g.dual_pol());
  if (static_cast<std::size_t>(a1.size()) != g.complex_rows())
    throw std::invalid_argument("A1 length differs from the perturbation matrix rows");
  const Eigen::VectorXd a = real_stack(a1);
  const Eigen::MatrixXd& x = g.stacked();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  const Eigen::MatrixXd full = gram.selfadjointView<Eigen::Lower>();
  normal_ += full;
  rhs_.noalias() += x.transpose() * a;
  a1_energy_ += a.squaredNorm();
  ++frames_;
}

void PerturbationSystem::accumulate_streamed(const Field& tx, const LinkSpec& link, const GBuildOptions& opts,
                                             const Eigen::VectorXcd& a1, std::size_t block_columns) {
  check(grid_, is_dual_pol(tx));
  if (block_columns == 0) throw std::invalid_argument("block size must be positive");
  const std::size_t rails = is_dual_pol(tx) ? 2 : 1;
  const auto rows = static_cast<Eigen::Index>(rails * kept_rows(field_size(tx), opts.guard_samples));
  if (a1.size() != rows) throw std::invalid_argument("A1 length differs from the perturbation matrix rows");
  const Eigen::VectorXd a = real_stack(a1);
  const std::size_t k = grid_.size();

  auto block = [&](std::size_t b0, std::size_t b1) {
    Eigen::MatrixXd x(2 * rows, static_cast<Eigen::Index>(b1 - b0));
    for_each_g_column(tx, link, grid_, opts, b0, b1, [&](std::size_t j, const Eigen::VectorXcd& c) {
      const auto col = static_cast<Eigen::Index>(j - b0);
      x.col(col).head(rows) = c.real();
      x.col(col).tail(rows) = c.imag();
    });
    return x;
  };

  for (std::size_t i0 = 0; i0 < k; i0 += block_columns) {
    const std::size_t i1 = std::min(k, i0 + block_columns);
    const Eigen::MatrixXd xi = block(i0, i1);
    const auto ii = static_cast<Eigen::Index>(i0);
    const auto ni = static_cast<Eigen::Index>(i1 - i0);
    rhs_.segment(ii, ni).noalias() += xi.transpose() * a;
    normal_.block(ii, ii, ni, ni).noalias() += xi.transpose() * xi;
    for (std::size_t j0 = i1; j0 < k; j0 += block_columns) {
      const std::size_t j1 = std::min(k, j0 + block_columns);
      const Eigen::MatrixXd xj = block(j0, j1);
      const auto jj = static_cast<Eigen::Index>(j0);
      const auto nj = static_cast<Eigen::Index>(j1 - j0);
      const Eigen::MatrixXd cross = xi.transpose() * xj;
      normal_.block(ii, jj, ni, nj) += cross;
      normal_.block(jj, ii, nj, ni) += cross.transpose();
    }
  }
  normal_ = (0.5 * (normal_ + normal_.transpose())).eval();
  a1_energy_ += a.squaredNorm();
  ++frames_;
}

void PerturbationSystem::merge(const PerturbationSystem& other) {
  check(other.grid_, other.dual_pol_);
  normal_ += other.normal_;
  rhs_ += other.rhs_;
  a1_energy_ += other.a1_energy_;
  frames_ += other.frames_;
}

double PerturbationSystem::cost(const Eigen::VectorXd& gamma) const {
  return a1_energy_ + gamma.dot(normal_ * gamma) - 2.0 * rhs_.dot(gamma);
}

Eigen::VectorXd PerturbationSystem::gradient(const Eigen::VectorXd& gamma) const {
  return 2.0 * normal_ * gamma - 2.0 * rhs_;
}

}  // namespace ppe
