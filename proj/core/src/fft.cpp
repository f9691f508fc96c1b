#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace dgmo::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans live for the process lifetime.
PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> re(n);
  std::vector<std::complex<double>> cx(n / 2 + 1);
  auto* cx_ptr = reinterpret_cast<fftw_complex*>(cx.data());
  const int size = static_cast<int>(n);
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(size, re.data(), cx_ptr, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inverse = fftw_plan_dft_c2r_1d(size, cx_ptr, re.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  cache.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n), real_buf_(n), complex_buf_(n / 2 + 1) {
  auto p = plans_for(n);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_buf_.begin());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), real_buf_.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  std::copy(in.begin(), in.end(), complex_buf_.begin());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(complex_buf_.data()), out.data());
}

}  // namespace dgmo::detail
