#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dgmo/matrix.hpp"
#include "dgmo/stft.hpp"

namespace dgmo {

enum class MelScale { htk, slaney };
enum class FilterNorm { none, slaney_area };
enum class MelDomain { linear, log };

struct MelConfig {
  int n_mels = 256;
  double f_min = 0.0;
  // Nyquist when unset.
  std::optional<double> f_max;
  MelScale mel_scale = MelScale::htk;
  FilterNorm filter_norm = FilterNorm::none;
  MelDomain loss_domain = MelDomain::log;
  double log_floor = 1e-5;

  double resolved_f_max(int sample_rate) const {
    return f_max.value_or(sample_rate / 2.0);
  }
  // Copy with f_max pinned to a concrete value.
  MelConfig resolved(int sample_rate) const;
  void validate(int sample_rate) const;

  friend bool operator==(const MelConfig&, const MelConfig&) = default;
};

// True when both configs describe the same filterbank and loss space once
// f_max is resolved against `sample_rate`.
bool same_mel_space(const MelConfig& a, const MelConfig& b, int sample_rate);
// Like same_mel_space but ignores loss_domain and log_floor: true when both
// configs produce the same filterbank matrix.
bool same_filter_geometry(const MelConfig& a, const MelConfig& b, int sample_rate);

double hz_to_mel(double hz, MelScale scale);
double mel_to_hz(double mel, MelScale scale);

// Triangular filters, n_mels x bins. Filter supports are contiguous, so each
// row is stored as a dense slice [first, last] to keep apply() sparse.
class MelFilterbank {
 public:
  MelFilterbank(const MelConfig& mel, const StftConfig& stft, int sample_rate);

  std::size_t n_mels() const noexcept { return weights_.rows(); }
  std::size_t n_bins() const noexcept { return weights_.cols(); }
  const RealMatrix& weights() const noexcept { return weights_; }
  // Inclusive bin range with nonzero weight for filter m.
  std::pair<std::size_t, std::size_t> support(std::size_t m) const { return support_[m]; }
  // Peak frequency (Hz) of each triangle.
  const std::vector<double>& center_frequencies() const noexcept { return centers_hz_; }

  const MelConfig& mel_config() const noexcept { return mel_; }
  const StftConfig& stft_config() const noexcept { return stft_; }
  int sample_rate() const noexcept { return sample_rate_; }

  // out = W * spec. `out` is resized to n_mels x spec.cols().
  void apply(const RealMatrix& spec, RealMatrix& out) const;
  // out = W^T * mel. `out` is resized to n_bins x mel.cols().
  void apply_transpose(const RealMatrix& mel, RealMatrix& out) const;

 private:
  MelConfig mel_;
  StftConfig stft_;
  int sample_rate_;
  RealMatrix weights_;
  std::vector<std::pair<std::size_t, std::size_t>> support_;
  std::vector<double> centers_hz_;
};

MelFilterbank build_mel_filterbank(const MelConfig& mcfg, const StftConfig& scfg, int sample_rate);

struct MelSpectrogram {
  RealMatrix values;  // n_mels x frames
  MelDomain domain = MelDomain::log;
  MelConfig config;
};

// Linear: W * |X|. Log: ln(max(W * |X|, log_floor)).
MelSpectrogram apply_mel(const MagnitudeSpectrogram& mag, const MelFilterbank& fb, MelDomain domain);

// In-place domain conversion of a linear mel matrix.
void to_log_domain(RealMatrix& linear, double log_floor);

}  // namespace dgmo
