#include "fft.hpp"

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace tactile::detail {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  in_ = fftw_alloc_real(n);
  out_ = fftw_alloc_complex(n / 2 + 1);
  plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan_);
  fftw_free(in_);
  fftw_free(out_);
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> in) const {
  const std::size_t m = std::min(in.size(), n_);
  std::memcpy(in_, in.data(), m * sizeof(double));
  if (m < n_) std::memset(in_ + m, 0, (n_ - m) * sizeof(double));
  fftw_execute(plan_);
  std::vector<std::complex<double>> out(n_ / 2 + 1);
  std::memcpy(static_cast<void*>(out.data()), out_, out.size() * sizeof(fftw_complex));
  return out;
}

ComplexFft::ComplexFft(std::size_t n, bool inverse) : n_(n) {
  std::lock_guard lock(planner_mutex());
  in_ = fftw_alloc_complex(n);
  out_ = fftw_alloc_complex(n);
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_,
                           inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan_);
  fftw_free(in_);
  fftw_free(out_);
}

std::vector<std::complex<double>> ComplexFft::run(
    std::span<const std::complex<double>> in) const {
  const std::size_t m = std::min(in.size(), n_);
  std::memcpy(in_, in.data(), m * sizeof(fftw_complex));
  if (m < n_) std::memset(in_ + m, 0, (n_ - m) * sizeof(fftw_complex));
  fftw_execute(plan_);
  std::vector<std::complex<double>> out(n_);
  std::memcpy(static_cast<void*>(out.data()), out_, n_ * sizeof(fftw_complex));
  return out;
}

const RealFft& real_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

const ComplexFft& complex_fft(std::size_t n, bool inverse) {
  thread_local std::map<std::pair<std::size_t, bool>, std::unique_ptr<ComplexFft>> cache;
  auto& slot = cache[{n, inverse}];
  if (!slot) slot = std::make_unique<ComplexFft>(n, inverse);
  return *slot;
}

}  // namespace tactile::detail
