#pragma once

// Reference computations for tests. Everything here is written from the
// textbook definitions and deliberately shares no code path with dgmo::core
// beyond the plain data types.

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "dgmo/mask_optim.hpp"
#include "dgmo/matrix.hpp"
#include "dgmo/mel.hpp"
#include "dgmo/waveform.hpp"

namespace dgmo::testing {

// X[k] = sum_n x[n] exp(-2 pi i k n / N), k in [0, bins).
std::vector<std::complex<double>> direct_dft(const std::vector<double>& x, std::size_t bins);

// Periodic Hann of `win` samples centered in `n_fft` zeros.
std::vector<double> hann_padded(int win, int n_fft);

// Linear interpolation with exact integer position arithmetic:
// out[j] = lerp at input position j * src / dst.
std::vector<double> brute_resample(const std::vector<double>& x, int src, int dst, std::size_t out_len);

double htk_mel(double hz);
double htk_hz(double mel);

// out = W * X with a dense triple loop.
RealMatrix dense_matmul(const RealMatrix& w, const RealMatrix& x);

// (1/n) sum_i mean_cells (D(W (x * sigmoid(L))) - ref_i)^2 evaluated naively.
double naive_loss(const RealMatrix& logits, const RealMatrix& x, const std::vector<RealMatrix>& refs,
                  const RealMatrix& weights, MelDomain domain, double log_floor);

// Central differences of f around `at`, step eps, one coordinate at a time.
RealMatrix central_differences(const std::function<double(const RealMatrix&)>& f, const RealMatrix& at,
                               double eps);

// |S| / (|S| + |N|), 0 where both vanish.
RealMatrix ideal_ratio_mask(const RealMatrix& target_mag, const RealMatrix& interferer_mag);

std::vector<double> seeded_noise(std::size_t n, std::uint64_t seed, double stddev = 1.0);

}  // namespace dgmo::testing
