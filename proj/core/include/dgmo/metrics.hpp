#pragma once

#include <span>
#include <vector>

#include "dgmo/waveform.hpp"

namespace dgmo {

// Ratios that would be infinite (exact reconstruction) are reported as this.
inline constexpr double kMetricCapDb = 120.0;

struct EvalResult {
  double si_sdr = 0.0;
  double sdr = 0.0;
  double sdr_mixture = 0.0;
  double sdri = 0.0;  // sdr - sdr_mixture
};

// Scale-invariant SDR in dB. Throws DomainError for an all-zero reference and
// ContractError for unequal lengths.
double si_sdr(std::span<const double> est, std::span<const double> ref);
double sdr(std::span<const double> est, std::span<const double> ref);
double sdri(std::span<const double> est, std::span<const double> ref, std::span<const double> mix);

// Waveform overloads truncate or zero-pad est (and mix) to the reference length.
double si_sdr(const Waveform& est, const Waveform& ref);
double sdr(const Waveform& est, const Waveform& ref);
double sdri(const Waveform& est, const Waveform& ref, const Waveform& mix);
EvalResult evaluate(const Waveform& est, const Waveform& ref, const Waveform& mix);

// Truncates or zero-pads to `length`.
std::vector<double> align_length(std::span<const double> x, std::size_t length);

}  // namespace dgmo
