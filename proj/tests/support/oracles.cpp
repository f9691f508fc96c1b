#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace dgmo::testing {

std::vector<std::complex<double>> direct_dft(const std::vector<double>& x, std::size_t bins) {
  const double n = static_cast<double>(x.size());
  std::vector<std::complex<double>> out(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      // Reduce k*t mod N first so the angle stays small and accurate.
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((k * t) % x.size()) / n;
      acc += x[t] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> hann_padded(int win, int n_fft) {
  std::vector<double> w(static_cast<std::size_t>(n_fft), 0.0);
  const int off = (n_fft - win) / 2;
  for (int i = 0; i < win; ++i) w[static_cast<std::size_t>(off + i)] = std::pow(std::sin(std::numbers::pi * i / win), 2);
  return w;
}

std::vector<double> brute_resample(const std::vector<double>& x, int src, int dst, std::size_t out_len) {
  std::vector<double> out(out_len);
  for (std::size_t j = 0; j < out_len; ++j) {
    const std::uint64_t num = static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(src);
    const std::size_t i = num / static_cast<std::uint64_t>(dst);
    const double frac = static_cast<double>(num % static_cast<std::uint64_t>(dst)) / dst;
    if (i + 1 >= x.size()) {
      out[j] = x.back();
    } else {
      out[j] = (1.0 - frac) * x[i] + frac * x[i + 1];
    }
  }
  return out;
}

double htk_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double htk_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

RealMatrix dense_matmul(const RealMatrix& w, const RealMatrix& x) {
  RealMatrix out(w.rows(), x.cols());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w.cols(); ++k) acc += w(r, k) * x(k, c);
      out(r, c) = acc;
    }
  }
  return out;
}

double naive_loss(const RealMatrix& logits, const RealMatrix& x, const std::vector<RealMatrix>& refs,
                  const RealMatrix& weights, MelDomain domain, double log_floor) {
  RealMatrix masked(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) masked(r, c) = x(r, c) / (1.0 + std::exp(-logits(r, c)));
  }
  RealMatrix mel = dense_matmul(weights, masked);
  if (domain == MelDomain::log) {
    for (std::size_t r = 0; r < mel.rows(); ++r) {
      for (std::size_t c = 0; c < mel.cols(); ++c) mel(r, c) = std::log(std::max(mel(r, c), log_floor));
    }
  }
  double total = 0.0;
  for (const auto& ref : refs) {
    double sq = 0.0;
    for (std::size_t r = 0; r < mel.rows(); ++r) {
      for (std::size_t c = 0; c < mel.cols(); ++c) sq += std::pow(mel(r, c) - ref(r, c), 2);
    }
    total += sq / static_cast<double>(mel.rows() * mel.cols());
  }
  return total / static_cast<double>(refs.size());
}

RealMatrix central_differences(const std::function<double(const RealMatrix&)>& f, const RealMatrix& at, double eps) {
  RealMatrix out(at.rows(), at.cols());
  for (std::size_t r = 0; r < at.rows(); ++r) {
    for (std::size_t c = 0; c < at.cols(); ++c) {
      RealMatrix plus = at, minus = at;
      plus(r, c) += eps;
      minus(r, c) -= eps;
      out(r, c) = (f(plus) - f(minus)) / (2.0 * eps);
    }
  }
  return out;
}

RealMatrix ideal_ratio_mask(const RealMatrix& target_mag, const RealMatrix& interferer_mag) {
  RealMatrix out(target_mag.rows(), target_mag.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      const double s = target_mag(r, c);
      const double d = s + interferer_mag(r, c);
      out(r, c) = d > 0.0 ? s / d : 0.0;
    }
  }
  return out;
}

std::vector<double> seeded_noise(std::size_t n, std::uint64_t seed, double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<double> out(n);
  for (double& v : out) v = normal(rng);
  return out;
}

}  // namespace dgmo::testing
