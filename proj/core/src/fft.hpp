#pragma once

// Thin RAII layer over FFTW. Plans are cached per thread; plan creation is
// serialized because the FFTW planner is not re-entrant.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tactile::detail {

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  // Input is zero-padded or truncated to size(). Returns n/2 + 1 bins.
  std::vector<std::complex<double>> forward(std::span<const double> in) const;

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

class ComplexFft {
 public:
  ComplexFft(std::size_t n, bool inverse);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  // Unnormalized transform.
  std::vector<std::complex<double>> run(std::span<const std::complex<double>> in) const;

 private:
  std::size_t n_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

const RealFft& real_fft(std::size_t n);
const ComplexFft& complex_fft(std::size_t n, bool inverse);

}  // namespace tactile::detail
