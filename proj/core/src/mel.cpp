#include "dgmo/mel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgmo/errors.hpp"

namespace dgmo {
namespace {

// Slaney (Auditory Toolbox) scale: linear below 1 kHz, logarithmic above.
constexpr double kSlaneyBreakHz = 1000.0;
constexpr double kSlaneyHzPerMel = 200.0 / 3.0;
constexpr double kSlaneyBreakMel = kSlaneyBreakHz / kSlaneyHzPerMel;
const double kSlaneyLogStep = std::log(6.4) / 27.0;

}  // namespace

double hz_to_mel(double hz, MelScale scale) {
  if (scale == MelScale::htk) return 2595.0 * std::log10(1.0 + hz / 700.0);
  if (hz < kSlaneyBreakHz) return hz / kSlaneyHzPerMel;
  return kSlaneyBreakMel + std::log(hz / kSlaneyBreakHz) / kSlaneyLogStep;
}

double mel_to_hz(double mel, MelScale scale) {
  if (scale == MelScale::htk) return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  if (mel < kSlaneyBreakMel) return mel * kSlaneyHzPerMel;
  return kSlaneyBreakHz * std::exp(kSlaneyLogStep * (mel - kSlaneyBreakMel));
}

MelConfig MelConfig::resolved(int sample_rate) const {
  MelConfig out = *this;
  out.f_max = resolved_f_max(sample_rate);
  return out;
}

void MelConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw ConfigError("mel: sample_rate must be positive");
  if (n_mels < 1) throw ConfigError("mel: n_mels must be >= 1");
  if (!(log_floor > 0.0)) throw ConfigError("mel: log_floor must be > 0");
  const double nyquist = sample_rate / 2.0;
  const double hi = resolved_f_max(sample_rate);
  if (hi > nyquist) {
    throw ConfigError("mel: f_max " + std::to_string(hi) + " Hz exceeds Nyquist " + std::to_string(nyquist) + " Hz");
  }
  if (!(f_min >= 0.0) || !(f_min < hi)) throw ConfigError("mel: need 0 <= f_min < f_max");
}

bool same_mel_space(const MelConfig& a, const MelConfig& b, int sample_rate) {
  return a.resolved(sample_rate) == b.resolved(sample_rate);
}

bool same_filter_geometry(const MelConfig& a, const MelConfig& b, int sample_rate) {
  const MelConfig ra = a.resolved(sample_rate);
  const MelConfig rb = b.resolved(sample_rate);
  return ra.n_mels == rb.n_mels && ra.f_min == rb.f_min && ra.f_max == rb.f_max &&
         ra.mel_scale == rb.mel_scale && ra.filter_norm == rb.filter_norm;
}

MelFilterbank::MelFilterbank(const MelConfig& mel, const StftConfig& stft, int sample_rate)
    : mel_(mel.resolved(sample_rate)), stft_(stft), sample_rate_(sample_rate) {
  mel_.validate(sample_rate);
  stft_.validate();
  const std::size_t n_mels = static_cast<std::size_t>(mel_.n_mels);
  const std::size_t n_bins = stft_.bins();
  weights_ = RealMatrix(n_mels, n_bins);
  support_.resize(n_mels);
  centers_hz_.resize(n_mels);

  const double lo = hz_to_mel(mel_.f_min, mel_.mel_scale);
  const double hi = hz_to_mel(*mel_.f_max, mel_.mel_scale);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double m = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1);
    edges[i] = mel_to_hz(m, mel_.mel_scale);
  }

  const double bin_hz = static_cast<double>(sample_rate) / stft_.fft_size;
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    centers_hz_[m] = center;
    const double norm = mel_.filter_norm == FilterNorm::slaney_area ? 2.0 / (right - left) : 1.0;
    std::size_t first = n_bins;
    std::size_t last = 0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      const double w = std::max(0.0, std::min(rise, fall));
      if (w > 0.0) {
        weights_(m, k) = w * norm;
        first = std::min(first, k);
        last = k;
      }
    }
    if (first == n_bins) {
      throw ConfigError("mel: filter " + std::to_string(m) + " (center " + std::to_string(center) +
                        " Hz) covers no FFT bin; reduce n_mels or raise fft_size");
    }
    support_[m] = {first, last};
  }
}

MelFilterbank build_mel_filterbank(const MelConfig& mcfg, const StftConfig& scfg, int sample_rate) {
  return MelFilterbank(mcfg, scfg, sample_rate);
}

void MelFilterbank::apply(const RealMatrix& spec, RealMatrix& out) const {
  if (spec.rows() != n_bins()) {
    throw ContractError("mel: spectrogram has " + std::to_string(spec.rows()) + " bins, filterbank expects " +
                        std::to_string(n_bins()));
  }
  const std::size_t frames = spec.cols();
  if (out.rows() != n_mels() || out.cols() != frames) out = RealMatrix(n_mels(), frames);
  for (std::size_t m = 0; m < n_mels(); ++m) {
    auto dst = out.row(m);
    std::fill(dst.begin(), dst.end(), 0.0);
    const auto [first, last] = support_[m];
    for (std::size_t k = first; k <= last; ++k) {
      const double w = weights_(m, k);
      if (w == 0.0) continue;
      const auto src = spec.row(k);
      for (std::size_t f = 0; f < frames; ++f) dst[f] += w * src[f];
    }
  }
}

void MelFilterbank::apply_transpose(const RealMatrix& mel, RealMatrix& out) const {
  if (mel.rows() != n_mels()) throw ContractError("mel: gradient rows differ from filter count");
  const std::size_t frames = mel.cols();
  if (out.rows() != n_bins() || out.cols() != frames) out = RealMatrix(n_bins(), frames);
  out.fill(0.0);
  for (std::size_t m = 0; m < n_mels(); ++m) {
    const auto src = mel.row(m);
    const auto [first, last] = support_[m];
    for (std::size_t k = first; k <= last; ++k) {
      const double w = weights_(m, k);
      if (w == 0.0) continue;
      auto dst = out.row(k);
      for (std::size_t f = 0; f < frames; ++f) dst[f] += w * src[f];
    }
  }
}

void to_log_domain(RealMatrix& linear, double log_floor) {
  for (double& v : linear.flat()) v = std::log(std::max(v, log_floor));
}

MelSpectrogram apply_mel(const MagnitudeSpectrogram& mag, const MelFilterbank& fb, MelDomain domain) {
  if (!(mag.config == fb.stft_config())) throw ContractError("apply_mel: filterbank built for a different STFT config");
  if (mag.signal.sample_rate != fb.sample_rate()) {
    throw ContractError("apply_mel: filterbank sample rate " + std::to_string(fb.sample_rate()) +
                        " differs from spectrogram sample rate " + std::to_string(mag.signal.sample_rate));
  }
  MelSpectrogram out;
  out.domain = domain;
  out.config = fb.mel_config();
  out.config.loss_domain = domain;
  fb.apply(mag.values, out.values);
  if (domain == MelDomain::log) to_log_domain(out.values, out.config.log_floor);
  return out;
}

}  // namespace dgmo
