#pragma once

#include <cstddef>
#include <span>

#include "ppe/field.hpp"

namespace ppe {

/// Spectral resampling of a cyclic frame: keeps the |f| < fs_out/2 band
/// (ideal low-pass), so a band-limited input is reproduced exactly.
/// Spectrum (FFT order, unnormalized forward transform) of the same
/// waveform at a different length; amplitude scaling included.
void resize_spectrum(std::span<const cplx> in, std::span<cplx> out);

Samples resample_spectral(const Samples& in, std::size_t n_out);

ComplexField decimate(const ComplexField& field, std::size_t factor);
DualPolField decimate(const DualPolField& field, std::size_t factor);
Field decimate(const Field& field, std::size_t factor);

/// Same frame at n_out samples (non-integer rate changes).
ComplexField resample(const ComplexField& field, std::size_t n_out);
DualPolField resample(const DualPolField& field, std::size_t n_out);
Field resample(const Field& field, std::size_t n_out);

}  // namespace ppe
