#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace dgmo {

inline constexpr int kDefaultSampleRate = 16000;
inline constexpr double kDefaultClipSeconds = 10.24;

// Mono signal. `gain_applied` is the product of every normalization gain
// applied since load, so the original scale is samples / gain_applied.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;
  double gain_applied = 1.0;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  // Throws ContractError if sample_rate <= 0, gain <= 0 or a sample is not finite.
  void validate() const;
};

enum class WavEncoding { pcm16, float32 };

// Reads a PCM16 or IEEE float32 WAV file, averages channels to mono and
// resamples to `target_sr` by linear interpolation. gain_applied is 1.0.
Waveform load_waveform(const std::filesystem::path& path, int target_sr = kDefaultSampleRate);

// Writes mono little-endian WAV. pcm16 clips to [-1, 1]; float32 stores the
// samples as-is (narrowed to float).
void save_waveform(const std::filesystem::path& path, const Waveform& w,
                   WavEncoding encoding = WavEncoding::float32);

// Linear-interpolation resampler. Output length is round(n * target / source),
// output sample j sits at input position j * source / target.
Waveform resample_linear(const Waveform& w, int target_sr);

// Pads (centered, zeros) or truncates (from the end) to round(duration_s * sr)
// samples, then scales so max |sample| == peak. All-zero input keeps gain 1.
Waveform pad_and_normalize(const Waveform& w, double duration_s = kDefaultClipSeconds,
                           double peak = 1.0);

// Left offset pad_and_normalize uses when centering `original_len` samples in
// `padded_len`. Zero when the input was truncated.
std::size_t centered_pad_offset(std::size_t original_len, std::size_t padded_len);

// Inverse of the padding step: cuts `original_len` samples back out of a
// padded signal (zero-filling past the end if the original was longer).
Waveform strip_padding(const Waveform& padded, std::size_t original_len);

// Divides samples by gain_applied and resets the gain to 1.
Waveform undo_gain(const Waveform& w);

double energy(const std::vector<double>& samples);
double peak_abs(const std::vector<double>& samples);

}  // namespace dgmo
