#include "ppe/resample.hpp"

#include <algorithm>
#include <stdexcept>

#include "ppe/fft.hpp"

namespace ppe {

void resize_spectrum(std::span<const cplx> in, std::span<cplx> out) {
  const std::size_t n_in = in.size();
  const std::size_t n_out = out.size();
  if (n_in % 2 != 0 || n_out % 2 != 0) throw std::invalid_argument("spectral resampling needs even lengths");
  const double scale = static_cast<double>(n_out) / static_cast<double>(n_in);
  if (n_in == n_out) {
    for (std::size_t k = 0; k < n_in; ++k) out[k] = in[k] * scale;
    return;
  }
  std::fill(out.begin(), out.end(), cplx{});
  const std::size_t half = std::min(n_in, n_out) / 2;
  // positive bins [0, half), negative bins [-half+1, -1]; the Nyquist bin is folded or split
  for (std::size_t k = 0; k < half; ++k) out[k] = in[k] * scale;
  for (std::size_t k = 1; k < half; ++k) out[n_out - k] = in[n_in - k] * scale;
  if (n_out < n_in) {
    out[half] = (in[half] + in[n_in - half]) * scale;
  } else {
    out[half] = 0.5 * in[half] * scale;
    out[n_out - half] = 0.5 * in[half] * scale;
  }
}

Samples resample_spectral(const Samples& in, std::size_t n_out) {
  if (n_out == in.size()) return in;
  Samples spec(in);
  fft_plan(in.size())->forward(spec);
  Samples out(n_out);
  resize_spectrum(spec, out);
  fft_plan(n_out)->inverse(out);
  return out;
}

ComplexField decimate(const ComplexField& field, std::size_t factor) {
  if (factor == 0 || field.size() % factor != 0) throw std::invalid_argument("decimation factor must divide N");
  if (factor == 1) return field;
  return ComplexField(resample_spectral(field.data(), field.size() / factor),
                      field.sample_period() * static_cast<double>(factor), field.center_frequency());
}

DualPolField decimate(const DualPolField& field, std::size_t factor) {
  return DualPolField(decimate(field.x(), factor), decimate(field.y(), factor));
}

Field decimate(const Field& field, std::size_t factor) {
  return std::visit([&](const auto& f) -> Field { return decimate(f, factor); }, field);
}

ComplexField resample(const ComplexField& field, std::size_t n_out) {
  if (n_out == 0) throw std::invalid_argument("resample length must be positive");
  const double t = field.sample_period() * static_cast<double>(field.size()) / static_cast<double>(n_out);
  return ComplexField(resample_spectral(field.data(), n_out), t, field.center_frequency());
}
DualPolField resample(const DualPolField& field, std::size_t n_out) {
  return DualPolField(resample(field.x(), n_out), resample(field.y(), n_out));
}
Field resample(const Field& field, std::size_t n_out) {
  return std::visit([&](const auto& f) -> Field { return resample(f, n_out); }, field);
}

}  // namespace ppe
