#include "ppe/conditioning.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ppe/solver.hpp"
#include "ppe/units.hpp"

namespace ppe {

double stability_metric(double beta2_s2_per_m, double bandwidth_hz, double dz_m) {
  if (!(bandwidth_hz > 0.0) || !(dz_m > 0.0)) throw std::invalid_argument("bandwidth and dz must be positive");
  const double d = std::abs(beta2_s2_per_m) * bandwidth_hz * bandwidth_hz * dz_m;
  return d > 0.0 ? 1.0 / d : std::numeric_limits<double>::infinity();
}

ResolutionBound resolution_bound(double beta2_ps2_per_km, double bandwidth_ghz) {
  if (!(bandwidth_ghz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (beta2_ps2_per_km == 0.0) return {std::numeric_limits<double>::infinity(), true};
  // ps^2/km * GHz^2 = 1e-6 / km
  const double denom = std::abs(beta2_ps2_per_km) * bandwidth_ghz * bandwidth_ghz * 1e-6;
  return {0.156 / denom, false};
}

namespace {

template <typename Matrix>
double svd_condition(const Matrix& a) {
  if (a.cols() == 0) throw std::invalid_argument("empty matrix");
  Matrix r;
  if (a.rows() > a.cols()) {
    Eigen::HouseholderQR<Matrix> qr(a);
    r = qr.matrixQR().topRows(a.cols()).template triangularView<Eigen::Upper>();
  } else {
    r = a;
  }
  Eigen::JacobiSVD<Matrix> svd(r);
  const auto& s = svd.singularValues();
  const double hi = s.maxCoeff();
  const double lo = s.minCoeff();
  // raw ratio, like MATLAB cond(); beyond ~1/eps it only reflects round-off
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace

double condition_number(const PerturbationMatrix& g) { return svd_condition<Eigen::MatrixXd>(g.stacked()); }

double complex_condition_number(const PerturbationMatrix& g) {
  return svd_condition<Eigen::MatrixXcd>(g.complex_matrix());
}

double condition_number(const PerturbationSystem& system) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(system.normal_matrix(), Eigen::EigenvaluesOnly);
  const double hi = eig.eigenvalues().maxCoeff();
  const double lo = eig.eigenvalues().minCoeff();
  if (!(lo > 0.0) || !(hi > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(hi / lo);
}

ConditioningReport conditioning_report(const PerturbationMatrix& g, double beta2_s2_per_m, double bandwidth_hz,
                                       Modulation format, bool with_complex) {
  ConditioningReport r;
  r.k = g.columns();
  r.dz_m = g.grid().dz_m;
  r.bandwidth_hz = bandwidth_hz;
  r.beta2_s2_per_m = beta2_s2_per_m;
  r.format = format;
  r.metric = stability_metric(beta2_s2_per_m, bandwidth_hz, r.dz_m);
  r.cond_g = condition_number(g);
  if (with_complex) r.cond_g_complex = complex_condition_number(g);
  r.stable_predicted = r.metric < kStabilityMetricThreshold;
  r.stable_observed = r.cond_g < kStableConditionThreshold;
  return r;
}

std::vector<ConditioningReport> condition_sweep(const SweepSpec& spec) {
  if (spec.k < 2) throw std::invalid_argument("sweep needs k >= 2");
  std::vector<ConditioningReport> out;
  for (Modulation format : spec.formats)
    for (double b2 : spec.beta2_ps2_per_km)
      for (double bw : spec.bandwidth_ghz)
        for (double dz : spec.dz_km) {
          SourceSpec src;
          src.format = format;
          src.symbol_rate_hz = gbd_to_hz(bw);
          src.rolloff = spec.rolloff;
          src.seed = spec.seed;
          src.validate();
          const auto tx = generate_source(src, spec.n_symbols, spec.samples_per_symbol).field;
          const double length_km = dz * static_cast<double>(spec.k);
          // loss and gamma do not enter G; a lossless unit-gamma span suffices
          const LinkSpec link({SpanSpec::from_conventional(length_km, 0.0, b2, 0.0, 1.0, 0.0)});
          const auto grid = EstimationGrid::uniform(link, km_to_m(dz));
          GBuildOptions go;
          go.nl_oversampling = spec.nl_oversampling;
          const auto g = build_g(Field(tx), link, grid, go);
          out.push_back(conditioning_report(g, ps2_per_km_to_s2_per_m(b2), src.symbol_rate_hz * (1.0 + spec.rolloff),
                                            format, spec.with_complex));
        }
  return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman needs two equal-length samples");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ppe
