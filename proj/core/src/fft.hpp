#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dgmo::detail {

// Real FFT of fixed size backed by a shared FFTW plan. Plans are created under
// a global lock with FFTW_ESTIMATE (no timing-dependent algorithm choice, so
// results are bitwise reproducible) and cached per size. Instances own their
// scratch buffers; use one per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  // out must hold bins() values.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse: result is n * x. out must hold size() values.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
  std::vector<double> real_buf_;
  std::vector<std::complex<double>> complex_buf_;
};

}  // namespace dgmo::detail
