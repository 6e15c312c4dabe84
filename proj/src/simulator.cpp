#include "ppe/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ppe/errors.hpp"
#include "ppe/fft.hpp"
#include "ppe/units.hpp"

namespace ppe {

void SimConfig::validate() const {
  if (!(step_m > 0.0)) throw ConfigError("simulation step must be positive");
  if (sps < 4) throw ConfigError("simulation oversampling must be at least 4 samples/symbol");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double ase_sample_variance(double amp_gain, double nf_db, double carrier_hz, double sample_rate_hz,
                           double reference_power_w) {
  if (amp_gain <= 1.0) return 0.0;
  const double nsp = db_to_linear(nf_db) / 2.0;
  const double psd = nsp * kPlanck * carrier_hz * (amp_gain - 1.0);
  return psd * sample_rate_hz / reference_power_w;
}

namespace {

void add_noise(std::vector<Samples*> rails, double variance, double bandwidth_hz, double sample_period,
               std::uint64_t seed) {
  if (!(variance > 0.0)) return;
  const double fs = 1.0 / sample_period;
  if (bandwidth_hz > fs * (1.0 + 1e-12)) throw std::invalid_argument("ASE bandwidth exceeds the sample rate");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
  for (Samples* rail : rails) {
    Samples noise(rail->size());
    for (auto& n : noise) {
      const double re = g(rng);
      n = cplx(re, g(rng));
    }
    if (bandwidth_hz < fs * (1.0 - 1e-12)) {
      const auto plan = fft_plan(noise.size());
      const auto w = angular_frequencies(noise.size(), sample_period);
      plan->forward(noise);
      for (std::size_t k = 0; k < noise.size(); ++k)
        if (std::abs(w[k]) / (2.0 * kPi) > bandwidth_hz / 2.0) noise[k] = 0.0;
      plan->inverse(noise);
    }
    for (std::size_t n = 0; n < noise.size(); ++n) (*rail)[n] += noise[n];
  }
}

// Per-span step schedule: uniform steps with a short final step.
std::vector<double> step_boundaries(double start, double length, double step) {
  std::vector<double> b{start};
  const auto full = static_cast<std::size_t>(std::floor(length / step * (1.0 + 1e-12)));
  for (std::size_t j = 1; j <= full; ++j) b.push_back(start + static_cast<double>(j) * step);
  if (start + length - b.back() > 1e-9 * step) b.push_back(start + length);
  b.back() = start + length;
  return b;
}

// exp(-j phi) for the small per-step Kerr phases; falls back to sin/cos
// once the truncated series would lose accuracy
inline cplx kerr_factor(double phi) {
  if (std::abs(phi) < 0.05) {
    const double p2 = phi * phi;
    const double c = 1.0 - p2 * (0.5 - p2 * (1.0 / 24.0 - p2 / 720.0));
    const double s = phi * (1.0 - p2 * (1.0 / 6.0 - p2 * (1.0 / 120.0 - p2 / 5040.0)));
    return {c, -s};
  }
  return {std::cos(phi), -std::sin(phi)};
}

std::vector<cplx> phase_vector(std::span<const double> omega, double acc_b2, double acc_b3) {
  std::vector<cplx> h(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const double w = omega[k];
    const double ph = -(0.5 * acc_b2 * w * w + acc_b3 / 6.0 * w * w * w);
    h[k] = cplx(std::cos(ph), std::sin(ph));
  }
  return h;
}

}  // namespace

ComplexField inject_ase(const ComplexField& field, double amp_gain, double nf_db, double bandwidth_hz,
                        double reference_power_w, std::uint64_t seed) {
  if (amp_gain < 1.0) throw std::invalid_argument("amplifier gain must be >= 1");
  Samples s(field.data());
  const double var = ase_sample_variance(amp_gain, nf_db, field.center_frequency(), field.sample_rate(), reference_power_w);
  add_noise({&s}, var, bandwidth_hz, field.sample_period(), seed);
  return field.with_samples(std::move(s));
}

DualPolField inject_ase(const DualPolField& field, double amp_gain, double nf_db, double bandwidth_hz,
                        double reference_power_w, std::uint64_t seed) {
  if (amp_gain < 1.0) throw std::invalid_argument("amplifier gain must be >= 1");
  Samples x(field.x().data());
  Samples y(field.y().data());
  const double var =
      ase_sample_variance(amp_gain, nf_db, field.center_frequency(), 1.0 / field.sample_period(), reference_power_w);
  add_noise({&x, &y}, var, bandwidth_hz, field.sample_period(), seed);
  return DualPolField(field.x().with_samples(std::move(x)), field.y().with_samples(std::move(y)));
}

SimResult propagate(const Field& tx, const LinkSpec& link, const SimConfig& cfg) {
  cfg.validate();
  Rails r = to_rails(tx);
  const std::size_t n = r.size();
  const double T = r.sample_period;
  const auto plan = fft_plan(n);
  const auto omega = angular_frequencies(n, T);
  const double kerr = r.dual_pol() ? kManakovFactor : 1.0;

  std::size_t step_count = 0;
  double max_offset = 0.0;
  std::vector<double> grid;

  for (std::size_t i = 0; i < link.spans().size(); ++i) {
    const SpanSpec& span = link.spans()[i];
    const double start = link.span_start_m(i);
    const double launch = link.launch_power_w(i);

    if (cfg.ase_enabled) {
      const double gain = link.amplifier_gain(i);
      const double var = ase_sample_variance(gain, span.amplifier.noise_figure_db, r.center_frequency, 1.0 / T, launch);
      std::vector<Samples*> ptrs;
      for (auto& rail : r.rails) ptrs.push_back(&rail);
      add_noise(ptrs, var, 1.0 / T, T, mix_seed(cfg.seed, i));
    }

    const auto bounds = step_boundaries(start, span.length_m, cfg.step_m);
    const std::size_t steps = bounds.size() - 1;

    // point losses inside this span, snapped to the nearest step boundary
    std::vector<double> loss_db_at(bounds.size(), 0.0);
    for (const auto& pl : link.point_losses()) {
      if (pl.position_m <= start || pl.position_m > start + span.length_m) continue;
      std::size_t best = 0;
      for (std::size_t j = 1; j < bounds.size(); ++j)
        if (std::abs(bounds[j] - pl.position_m) < std::abs(bounds[best] - pl.position_m)) best = j;
      loss_db_at[best] += pl.attenuation_db;
      max_offset = std::max(max_offset, std::abs(bounds[best] - pl.position_m));
    }

    const double full = bounds.size() > 2 ? bounds[1] - bounds[0] : span.length_m;
    const auto h_half = phase_vector(omega, span.beta2_s2_per_m * full / 2.0, span.beta3_s3_per_m * full / 2.0);
    const auto h_full = phase_vector(omega, span.beta2_s2_per_m * full, span.beta3_s3_per_m * full);

    std::vector<Samples> spec = r.rails;
    for (auto& s : spec) plan->forward(s);

    double power = launch;
    double pending = 0.0;  // length whose CD is still to be applied to the spectra
    for (std::size_t j = 0; j < steps; ++j) {
      power *= db_to_linear(-loss_db_at[j]);
      grid.push_back(bounds[j]);
      const double len = bounds[j + 1] - bounds[j];
      const double cd_len = pending + len / 2.0;
      const std::vector<cplx>* h = nullptr;
      std::vector<cplx> h_tmp;
      if (std::abs(cd_len - full) < 1e-9 * full) h = &h_full;
      else if (std::abs(cd_len - full / 2.0) < 1e-9 * full) h = &h_half;
      else {
        h_tmp = phase_vector(omega, span.beta2_s2_per_m * cd_len, span.beta3_s3_per_m * cd_len);
        h = &h_tmp;
      }
      const double gamma_int = span.alpha_per_m > 0.0
                                   ? span.gamma_per_w_m * power * (-std::expm1(-span.alpha_per_m * len)) / span.alpha_per_m
                                   : span.gamma_per_w_m * power * len;
      const double rot = kerr * gamma_int;

      for (std::size_t p = 0; p < spec.size(); ++p) {
        auto& s = spec[p];
        for (std::size_t k = 0; k < n; ++k) s[k] *= (*h)[k];
        plan->inverse(s);
      }
      if (rot != 0.0) {
        if (spec.size() == 1) {
          for (auto& v : spec[0]) v *= kerr_factor(rot * std::norm(v));
        } else {
          for (std::size_t k = 0; k < n; ++k) {
            const cplx e = kerr_factor(rot * (std::norm(spec[0][k]) + std::norm(spec[1][k])));
            spec[0][k] *= e;
            spec[1][k] *= e;
          }
        }
      }
      for (auto& s : spec) plan->forward(s);
      pending = len / 2.0;
      power *= std::exp(-span.alpha_per_m * len);
      ++step_count;
    }

    const auto h_last = phase_vector(omega, span.beta2_s2_per_m * pending, span.beta3_s3_per_m * pending);
    for (std::size_t p = 0; p < spec.size(); ++p) {
      for (std::size_t k = 0; k < n; ++k) spec[p][k] *= h_last[k];
      plan->inverse(spec[p]);
      r.rails[p] = std::move(spec[p]);
    }
  }
  grid.push_back(link.total_length_m());

  return SimResult{from_rails(std::move(r)), theoretical_profile(link, grid), step_count, max_offset};
}

}  // namespace ppe
