#include "ppe/source.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ppe/errors.hpp"
#include "ppe/fft.hpp"

namespace ppe {

Modulation parse_modulation(const std::string& name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "qpsk") return Modulation::qpsk;
  if (n == "16qam") return Modulation::qam16;
  if (n == "64qam") return Modulation::qam64;
  if (n == "pcs64qam") return Modulation::pcs64qam;
  if (n == "gaussian") return Modulation::gaussian;
  throw ConfigError("unknown modulation format '" + name + "'");
}

std::string to_string(Modulation m) {
  switch (m) {
    case Modulation::qpsk: return "QPSK";
    case Modulation::qam16: return "16QAM";
    case Modulation::qam64: return "64QAM";
    case Modulation::pcs64qam: return "PCS64QAM";
    case Modulation::gaussian: return "Gaussian";
  }
  return "?";
}

void SourceSpec::validate() const {
  if (!(symbol_rate_hz > 0.0)) throw ConfigError("symbol rate must be positive");
  if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ConfigError("roll-off must lie in [0, 1]");
  if (format == Modulation::pcs64qam && !(pcs_entropy_bits > 4.0 && pcs_entropy_bits < 6.0))
    throw ConfigError("PCS64QAM entropy must lie in (4, 6) bits");
}

namespace {

std::vector<cplx> square_qam(int m) {
  const int side = static_cast<int>(std::lround(std::sqrt(m)));
  std::vector<cplx> pts;
  for (int i = 0; i < side; ++i)
    for (int q = 0; q < side; ++q)
      pts.emplace_back(2.0 * i - (side - 1), 2.0 * q - (side - 1));
  return pts;
}

std::vector<double> mb_probabilities(const std::vector<cplx>& pts, double nu) {
  std::vector<double> p(pts.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) sum += p[i] = std::exp(-nu * std::norm(pts[i]));
  for (auto& v : p) v /= sum;
  return p;
}

void normalize_energy(Constellation& c) {
  double e = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i) e += c.probabilities[i] * std::norm(c.points[i]);
  const double s = 1.0 / std::sqrt(e);
  for (auto& p : c.points) p *= s;
}

}  // namespace

double entropy_bits(const std::vector<double>& probabilities) {
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

double maxwell_boltzmann_parameter(double entropy) {
  if (!(entropy > 4.0 && entropy < 6.0)) throw ConfigError("PCS64QAM entropy must lie in (4, 6) bits");
  const auto pts = square_qam(64);
  // H(nu) decreases monotonically from 6 bits at nu = 0.
  double lo = 0.0, hi = 1.0;
  while (entropy_bits(mb_probabilities(pts, hi)) > entropy) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (entropy_bits(mb_probabilities(pts, mid)) > entropy) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

Constellation constellation(Modulation format, double pcs_entropy_bits) {
  Constellation c;
  switch (format) {
    case Modulation::qpsk: c.points = square_qam(4); break;
    case Modulation::qam16: c.points = square_qam(16); break;
    case Modulation::qam64: c.points = square_qam(64); break;
    case Modulation::pcs64qam: {
      c.points = square_qam(64);
      c.probabilities = mb_probabilities(c.points, maxwell_boltzmann_parameter(pcs_entropy_bits));
      break;
    }
    case Modulation::gaussian: return c;  // continuous, no point set
  }
  if (c.probabilities.empty()) c.probabilities.assign(c.points.size(), 1.0 / static_cast<double>(c.points.size()));
  normalize_energy(c);
  return c;
}

double rrc_response(double f_hz, double symbol_rate_hz, double rolloff) {
  const double f = std::abs(f_hz);
  const double half = symbol_rate_hz / 2.0;
  if (rolloff <= 0.0) return f <= half ? 1.0 : 0.0;
  const double f1 = half * (1.0 - rolloff);
  const double f2 = half * (1.0 + rolloff);
  if (f <= f1) return 1.0;
  if (f > f2) return 0.0;
  // sqrt of the raised-cosine transition
  return std::sqrt(0.5 * (1.0 + std::cos(kPi / (symbol_rate_hz * rolloff) * (f - f1))));
}

namespace {

std::vector<cplx> draw_symbols(const SourceSpec& spec, std::size_t n, std::mt19937_64& rng) {
  std::vector<cplx> sym(n);
  if (spec.format == Modulation::gaussian) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    for (auto& s : sym) {
      const double re = g(rng);
      s = cplx(re, g(rng));
    }
    return sym;
  }
  const auto c = constellation(spec.format, spec.pcs_entropy_bits);
  std::discrete_distribution<std::size_t> pick(c.probabilities.begin(), c.probabilities.end());
  for (auto& s : sym) s = c.points[pick(rng)];
  return sym;
}

Samples shape(const std::vector<cplx>& symbols, const SourceSpec& spec, std::size_t sps) {
  const std::size_t n = symbols.size() * sps;
  Samples x(n, cplx{});
  for (std::size_t i = 0; i < symbols.size(); ++i) x[i * sps] = symbols[i];
  const auto plan = fft_plan(n);
  plan->forward(x);
  const double fs = spec.symbol_rate_hz * static_cast<double>(sps);
  const auto w = angular_frequencies(n, 1.0 / fs);
  for (std::size_t k = 0; k < n; ++k) x[k] *= rrc_response(w[k] / (2.0 * kPi), spec.symbol_rate_hz, spec.rolloff);
  plan->inverse(x);
  return x;
}

ComplexField make_field(Samples s, double fs, double carrier, double target_power) {
  double p = 0.0;
  for (const auto& v : s) p += std::norm(v);
  p /= static_cast<double>(s.size());
  const double scale = std::sqrt(target_power / p);
  for (auto& v : s) v *= scale;
  return ComplexField(std::move(s), 1.0 / fs, carrier);
}

void check_request(const SourceSpec& spec, std::size_t n_symbols, std::size_t sps) {
  spec.validate();
  if (sps < 2) throw std::invalid_argument("source oversampling must be at least 2");
  if (n_symbols < 64) throw std::invalid_argument("source needs at least 64 symbols");
}

}  // namespace

SourceWaveform generate_source(const SourceSpec& spec, std::size_t n_symbols, std::size_t sps,
                               double center_frequency_hz) {
  check_request(spec, n_symbols, sps);
  std::mt19937_64 rng(spec.seed);
  auto symbols = draw_symbols(spec, n_symbols, rng);
  auto samples = shape(symbols, spec, sps);
  const double fs = spec.symbol_rate_hz * static_cast<double>(sps);
  return SourceWaveform{make_field(std::move(samples), fs, center_frequency_hz, 1.0), std::move(symbols)};
}

DualPolSourceWaveform generate_dual_pol_source(const SourceSpec& spec, std::size_t n_symbols, std::size_t sps,
                                               double center_frequency_hz) {
  check_request(spec, n_symbols, sps);
  std::mt19937_64 rng(spec.seed);
  auto sx = draw_symbols(spec, n_symbols, rng);
  auto sy = draw_symbols(spec, n_symbols, rng);
  const double fs = spec.symbol_rate_hz * static_cast<double>(sps);
  auto x = make_field(shape(sx, spec, sps), fs, center_frequency_hz, 0.5);
  auto y = make_field(shape(sy, spec, sps), fs, center_frequency_hz, 0.5);
  return DualPolSourceWaveform{DualPolField(std::move(x), std::move(y)), std::move(sx), std::move(sy)};
}

}  // namespace ppe
