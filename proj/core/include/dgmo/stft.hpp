#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "dgmo/matrix.hpp"
#include "dgmo/waveform.hpp"

namespace dgmo {

enum class WindowKind { hann };

struct StftConfig {
  int fft_size = 2048;
  int win_length = 1024;
  int hop_length = 160;
  WindowKind window = WindowKind::hann;
  // Reflect-pad fft_size / 2 samples on both sides before framing.
  bool center = true;

  std::size_t bins() const noexcept { return static_cast<std::size_t>(fft_size) / 2 + 1; }
  std::size_t frames(std::size_t signal_length) const;

  // Throws ConfigError on win_length > fft_size, hop <= 0 or hop > win_length.
  void validate() const;

  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

// Where a spectrogram came from; carried along so reconstruction can restore
// the original length and scale without extra arguments.
struct SignalInfo {
  std::size_t length = 0;
  int sample_rate = kDefaultSampleRate;
  double gain_applied = 1.0;

  friend bool operator==(const SignalInfo&, const SignalInfo&) = default;
};

// All spectrogram matrices are bins x frames.
struct ComplexSpectrogram {
  Matrix<std::complex<double>> values;
  StftConfig config;
  SignalInfo signal;
};

struct MagnitudeSpectrogram {
  RealMatrix values;
  StftConfig config;
  SignalInfo signal;
};

struct PhaseSpectrogram {
  RealMatrix values;
  StftConfig config;
  SignalInfo signal;
};

// Periodic analysis window of win_length samples, zero-padded (centered) to fft_size.
std::vector<double> analysis_window(const StftConfig& cfg);

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg);

// magnitude = |c|, phase = arg(c) with arg(0) == 0.
std::pair<MagnitudeSpectrogram, PhaseSpectrogram> magphase(const ComplexSpectrogram& c);

// mag * exp(i * phase).
ComplexSpectrogram recombine(const MagnitudeSpectrogram& mag, const PhaseSpectrogram& phase);

// Weighted overlap-add inverse with window-square normalization. The result
// carries the spectrogram's gain_applied unchanged; callers undo it.
Waveform istft(const MagnitudeSpectrogram& mag, const PhaseSpectrogram& phase,
               const StftConfig& cfg, std::size_t out_len);
Waveform istft(const ComplexSpectrogram& spec, std::size_t out_len);

}  // namespace dgmo
