#include "ppe/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace ppe {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("FFT length must be positive");
  std::vector<cplx> scratch(n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD, flags);
  backward_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_BACKWARD, flags);
  if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void FftPlan::forward(std::span<cplx> data) const {
  if (data.size() != n_) throw std::invalid_argument("FFT length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
}

void FftPlan::inverse(std::span<cplx> data) const {
  if (data.size() != n_) throw std::invalid_argument("FFT length mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

std::shared_ptr<const FftPlan> fft_plan(std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const FftPlan>(n);
  return slot;
}

std::vector<double> angular_frequencies(std::size_t n, double sample_period_s) {
  std::vector<double> w(n);
  const double df = 2.0 * kPi / (static_cast<double>(n) * sample_period_s);
  for (std::size_t k = 0; k < n; ++k) {
    const auto signed_k = k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    w[k] = signed_k * df;
  }
  return w;
}

}  // namespace ppe
