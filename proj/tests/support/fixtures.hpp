#pragma once

#include <cstdint>

#include "dgmo/mixkit.hpp"
#include "dgmo/stft.hpp"

namespace dgmo::testing {

// Target in [0, 2 kHz], background in [4, 8 kHz], mixed at 0 dB and peak
// normalized to 1 (no padding, clip length == duration).
struct SeparationProblem {
  Mixture stems;              // original scale
  Waveform mixture;           // normalized; gain_applied holds the gain
  Waveform target_normalized; // stems.target at the mixture's scale
  MagnitudeSpectrogram mag;
  PhaseSpectrogram phase;
};

SeparationProblem disjoint_band_problem(double seconds, std::uint64_t seed,
                                        const StftConfig& cfg = StftConfig{});

}  // namespace dgmo::testing
