#pragma once

#include <cstddef>
#include <cstdint>

#include "ppe/field.hpp"
#include "ppe/link.hpp"
#include "ppe/theoretical_profile.hpp"

namespace ppe {

struct SimConfig {
  double step_m = 50.0;
  std::size_t sps = 8;
  bool ase_enabled = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimResult {
  Field rx;
  TheoreticalProfile profile;        // evaluated at the step boundaries
  std::size_t steps = 0;
  double max_loss_offset_m = 0.0;    // point-loss snapping error, <= step/2
};

/// Symmetric split-step Fourier solution of the NLSE (one rail) or the
/// Manakov equation (two rails, 8/9 Kerr factor). Loss and gain are folded
/// into gamma'(z) = gamma P(z) so the field keeps unit mean power; ASE is
/// added after each span's amplifier when enabled.
SimResult propagate(const Field& tx, const LinkSpec& link, const SimConfig& cfg);

/// Adds circular white Gaussian noise of per-polarization PSD
/// n_sp h nu (G - 1), n_sp = 10^(NF/10) / 2, limited to `bandwidth_hz`
/// (<= sample rate) and expressed relative to `reference_power_w`.
ComplexField inject_ase(const ComplexField& field, double amp_gain, double nf_db, double bandwidth_hz,
                        double reference_power_w, std::uint64_t seed);
DualPolField inject_ase(const DualPolField& field, double amp_gain, double nf_db, double bandwidth_hz,
                        double reference_power_w, std::uint64_t seed);

/// Noise variance per complex sample (normalized units) added by inject_ase
/// before any band limiting.
double ase_sample_variance(double amp_gain, double nf_db, double carrier_hz, double sample_rate_hz,
                           double reference_power_w);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline constexpr double kManakovFactor = 8.0 / 9.0;

}  // namespace ppe
