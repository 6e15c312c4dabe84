#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

#include "ppe/field.hpp"
#include "ppe/link.hpp"

namespace ppe {

/// Uniform estimation positions z_k = k dz with the span gamma at each.
struct EstimationGrid {
  double dz_m = 0.0;
  std::vector<double> z_m;
  std::vector<double> gamma_per_w_m;

  static EstimationGrid uniform(const LinkSpec& link, double dz_m);
  std::size_t size() const { return z_m.size(); }
  bool operator==(const EstimationGrid&) const = default;
};

struct GBuildOptions {
  // Kerr product evaluated at this multiple of the estimation rate, then
  // low-passed back. 1 evaluates it directly at the estimation rate.
  std::size_t nl_oversampling = 2;
  // Rows dropped at each frame edge, per polarization.
  std::size_t guard_samples = 0;
};

/// Guard length covering the CD memory of the whole link.
std::size_t default_guard_samples(const LinkSpec& link, double bandwidth_hz, double sample_period_s);

/// Real-valued view of complex stacked vectors: [Re v; Im v]. With this
/// layout Re[a^H b] = stack(a)^T stack(b).
Eigen::VectorXd real_stack(const Eigen::VectorXcd& v);
Eigen::VectorXcd complex_unstack(const Eigen::VectorXd& v);

/// Materialized perturbation matrix G (x/y rails stacked vertically), held
/// in the real-stacked layout, guard rows removed.
class PerturbationMatrix {
 public:
  PerturbationMatrix(EstimationGrid grid, bool dual_pol, Eigen::MatrixXd stacked);

  const EstimationGrid& grid() const { return grid_; }
  bool dual_pol() const { return dual_pol_; }
  const Eigen::MatrixXd& stacked() const { return stacked_; }
  std::size_t complex_rows() const { return static_cast<std::size_t>(stacked_.rows()) / 2; }
  std::size_t columns() const { return static_cast<std::size_t>(stacked_.cols()); }

  Eigen::VectorXcd column(std::size_t k) const;
  Eigen::MatrixXcd complex_matrix() const;
  /// G * gamma as a complex stacked vector.
  Eigen::VectorXcd apply(const Eigen::VectorXd& gamma) const;

 private:
  EstimationGrid grid_;
  bool dual_pol_;
  Eigen::MatrixXd stacked_;
};

/// Column k of G: -j dz D_{z_k L} N[D_{0 z_k} A(0)], computed for k in
/// [k_begin, k_end) and delivered as the complex stacked, trimmed vector.
using ColumnSink = std::function<void(std::size_t k, const Eigen::VectorXcd& column)>;
void for_each_g_column(const Field& tx, const LinkSpec& link, const EstimationGrid& grid, const GBuildOptions& opts,
                       std::size_t k_begin, std::size_t k_end, const ColumnSink& sink);

PerturbationMatrix build_g(const Field& tx, const LinkSpec& link, const EstimationGrid& grid,
                           const GBuildOptions& opts = {});

enum class Alignment {
  none,          // A1 = rx - A0
  common_phase,  // data-aided removal of the common phase of rx against A0 first
};

struct A1Options {
  Alignment alignment = Alignment::common_phase;
  std::size_t guard_samples = 0;
};

struct ReceivedPerturbation {
  Eigen::VectorXcd a1;   // stacked, trimmed
  Eigen::VectorXcd a0;   // D_{0L} tx, stacked, trimmed
  Eigen::VectorXcd rx;   // aligned rx, stacked, trimmed
  double phase_rad = 0.0;
};

/// A1[L] = rx - D_{0L} tx, after optional common-phase alignment.
ReceivedPerturbation form_a1(const Field& rx, const Field& tx, const LinkSpec& link, const A1Options& opts = {});

struct SyncResult {
  std::ptrdiff_t lag = 0;   // rx[n + lag] lines up with the reference[n]
  double peak_ratio = 0.0;  // correlation peak over mean magnitude
};

/// Integer-lag circular cross-correlation of rx against the CD-loaded
/// transmit reference. Throws SyncError beyond max_lag or for a weak peak.
SyncResult synchronize(const Field& rx, const Field& tx, const LinkSpec& link, std::size_t max_lag,
                       double min_peak_ratio = 10.0);

/// Circularly advances a field by `lag` samples (out[n] = in[n + lag]).
Field shift_field(const Field& field, std::ptrdiff_t lag);

/// Accumulated normal equations Re[G^H G] gamma = Re[G^H A1] over frames.
class PerturbationSystem {
 public:
  PerturbationSystem(EstimationGrid grid, bool dual_pol);

  void accumulate(const PerturbationMatrix& g, const Eigen::VectorXcd& a1);
  /// Same contribution as accumulate(build_g(...), a1) without holding all
  /// of G: columns are regenerated block by block.
  void accumulate_streamed(const Field& tx, const LinkSpec& link, const GBuildOptions& opts, const Eigen::VectorXcd& a1,
                           std::size_t block_columns);
  void merge(const PerturbationSystem& other);

  const EstimationGrid& grid() const { return grid_; }
  bool dual_pol() const { return dual_pol_; }
  const Eigen::MatrixXd& normal_matrix() const { return normal_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  double a1_energy() const { return a1_energy_; }
  std::size_t frames() const { return frames_; }

  /// Cost ||A1 - G gamma||^2 summed over the accumulated frames.
  double cost(const Eigen::VectorXd& gamma) const;
  /// Analytic gradient 2 Re[G^H G] gamma - 2 Re[G^H A1].
  Eigen::VectorXd gradient(const Eigen::VectorXd& gamma) const;

 private:
  void check(const EstimationGrid& grid, bool dual_pol) const;

  EstimationGrid grid_;
  bool dual_pol_;
  Eigen::MatrixXd normal_;
  Eigen::VectorXd rhs_;
  double a1_energy_ = 0.0;
  std::size_t frames_ = 0;
};

}  // namespace ppe
