#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ppe/field.hpp"

namespace ppe {

/// In-place complex DFT of a fixed length. Plans are made with FFTW_ESTIMATE
/// so results are bit-reproducible run to run. inverse() includes the 1/N.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }
  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

 private:
  std::size_t n_;
  void* forward_;
  void* backward_;
};

/// Shared, internally synchronized plan cache keyed by length.
std::shared_ptr<const FftPlan> fft_plan(std::size_t n);

/// Angular frequencies of the DFT bins in FFT order (rad/s).
std::vector<double> angular_frequencies(std::size_t n, double sample_period_s);

}  // namespace ppe
