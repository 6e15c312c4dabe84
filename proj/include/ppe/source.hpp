#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ppe/field.hpp"

namespace ppe {

enum class Modulation { qpsk, qam16, qam64, pcs64qam, gaussian };

Modulation parse_modulation(const std::string& name);
std::string to_string(Modulation m);

struct SourceSpec {
  Modulation format = Modulation::qam16;
  double symbol_rate_hz = 128e9;
  double rolloff = 0.1;            // 0 means an ideal rectangular spectrum
  double pcs_entropy_bits = 4.347;
  std::uint64_t seed = 1;

  void validate() const;
  /// Occupied bandwidth symbol_rate * (1 + rolloff).
  double bandwidth_hz() const { return symbol_rate_hz * (1.0 + rolloff); }
};

struct SourceWaveform {
  ComplexField field;
  std::vector<cplx> symbols;
};

struct DualPolSourceWaveform {
  DualPolField field;
  std::vector<cplx> symbols_x;
  std::vector<cplx> symbols_y;
};

/// Constellation points scaled to unit mean energy under `probabilities`.
struct Constellation {
  std::vector<cplx> points;
  std::vector<double> probabilities;
};

Constellation constellation(Modulation format, double pcs_entropy_bits = 4.347);

/// Maxwell-Boltzmann shaping parameter nu for 64QAM, p ~ exp(-nu |x|^2),
/// giving the requested entropy in bits/symbol. Valid for 4 < H < 6.
double maxwell_boltzmann_parameter(double entropy_bits);
double entropy_bits(const std::vector<double>& probabilities);

/// Seeded symbol draw, pulse shaping in the frequency domain (cyclic frame)
/// and normalization to unit mean power.
SourceWaveform generate_source(const SourceSpec& spec, std::size_t n_symbols, std::size_t sps,
                               double center_frequency_hz = kDefaultCarrierHz);

/// Independent x and y symbol streams, each rail at half power.
DualPolSourceWaveform generate_dual_pol_source(const SourceSpec& spec, std::size_t n_symbols, std::size_t sps,
                                               double center_frequency_hz = kDefaultCarrierHz);

/// Root-raised-cosine amplitude response at frequency f (Hz), unit passband gain.
double rrc_response(double f_hz, double symbol_rate_hz, double rolloff);

}  // namespace ppe
