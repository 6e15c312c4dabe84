#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppe/perturbation.hpp"
#include "ppe/source.hpp"

namespace ppe {

/// Metric 1/(|beta2| BW^2 dz) below which estimation is predicted stable.
inline constexpr double kStabilityMetricThreshold = 12.84;

/// Dimensionless 1/(|beta2| BW^2 dz) in SI units; +inf for zero dispersion.
double stability_metric(double beta2_s2_per_m, double bandwidth_hz, double dz_m);

struct ResolutionBound {
  double km = 0.0;
  bool zero_dispersion = false;
};

/// Lower bound 0.156 / (|beta2| BW^2) on the spatial resolution for a
/// rectangular spectrum; beta2 in ps^2/km, BW in GHz.
ResolutionBound resolution_bound(double beta2_ps2_per_km, double bandwidth_ghz);

/// sigma_max / sigma_min of the real-stacked G, i.e. sqrt(cond Re[G^H G]).
/// Computed from the SVD of the R factor of a QR decomposition. +inf if
/// sigma_min is exactly zero.
double condition_number(const PerturbationMatrix& g);
/// Same quantity for the complex-valued G.
double complex_condition_number(const PerturbationMatrix& g);
/// sqrt(lambda_max / lambda_min) of the accumulated normal matrix; resolves
/// cond(G) only up to ~1e8 in double precision.
double condition_number(const PerturbationSystem& system);

struct ConditioningReport {
  double metric = 0.0;
  double cond_g = 0.0;
  double cond_g_complex = 0.0;  // 0 when not requested
  std::size_t k = 0;
  double dz_m = 0.0;
  double bandwidth_hz = 0.0;
  double beta2_s2_per_m = 0.0;
  Modulation format = Modulation::gaussian;
  bool stable_predicted = false;  // metric < kStabilityMetricThreshold
  bool stable_observed = false;   // cond_g < 10^4.3
};

ConditioningReport conditioning_report(const PerturbationMatrix& g, double beta2_s2_per_m, double bandwidth_hz,
                                       Modulation format, bool with_complex = false);

/// Grid for noiseless condition-number sweeps over single uniform spans.
struct SweepSpec {
  std::vector<double> beta2_ps2_per_km;
  std::vector<double> bandwidth_ghz;  // symbol rate; rectangular spectrum when rolloff = 0
  std::vector<double> dz_km;
  std::vector<Modulation> formats{Modulation::gaussian};
  std::size_t k = 300;                // positions per G; span length = k * dz
  std::size_t n_symbols = 8192;
  // 3 samples/symbol keeps the whole Kerr-broadened band of a rectangular
  // spectrum, so no nonlinear product is cut away or aliased
  std::size_t samples_per_symbol = 3;
  std::size_t nl_oversampling = 1;
  double rolloff = 0.0;
  std::uint64_t seed = 1;
  bool with_complex = false;
};

/// One report per grid combination, in (format, beta2, bw, dz) order.
std::vector<ConditioningReport> condition_sweep(const SweepSpec& spec);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ppe
