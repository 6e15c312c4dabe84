#pragma once

#include <filesystem>

#include "ppe/field.hpp"

namespace ppe {

/// Header stored next to the raw samples as `<path>.json`.
struct IqHeader {
  std::size_t n_samples = 0;
  double sample_period_s = 0.0;
  double center_frequency_hz = kDefaultCarrierHz;
  bool dual_pol = false;
  bool power_normalized = true;

  bool operator==(const IqHeader&) const = default;
};

/// Little-endian interleaved float64 I,Q (I_x,Q_x,I_y,Q_y for dual-pol).
void write_iq(const std::filesystem::path& path, const Field& field, bool power_normalized = true);
Field read_iq(const std::filesystem::path& path, IqHeader* header_out = nullptr);
IqHeader read_iq_header(const std::filesystem::path& path);
std::filesystem::path iq_header_path(const std::filesystem::path& path);

}  // namespace ppe
