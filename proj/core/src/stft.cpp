#include "dgmo/stft.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dgmo/errors.hpp"
#include "fft.hpp"

namespace dgmo {
namespace {

// Smallest window-square envelope accepted as invertible.
constexpr double kMinEnvelope = 1e-11;

// Signal index for padded position `p` under reflect padding (numpy "reflect",
// edge sample not repeated). Returns -1 where no sample exists.
long long reflect_index(long long i, long long len) {
  if (len == 1) return i == 0 ? 0 : -1;
  const long long period = 2 * (len - 1);
  i %= period;
  if (i < 0) i += period;
  return i < len ? i : period - i;
}

}  // namespace

void StftConfig::validate() const {
  if (fft_size < 2 || fft_size % 2 != 0) throw ConfigError("fft_size must be even and >= 2");
  if (win_length < 1 || win_length > fft_size) throw ConfigError("win_length must be in [1, fft_size]");
  if (hop_length < 1 || hop_length > win_length) throw ConfigError("hop_length must be in [1, win_length]");
}

std::size_t StftConfig::frames(std::size_t signal_length) const {
  const auto hop = static_cast<std::size_t>(hop_length);
  if (center) return 1 + signal_length / hop;
  const auto n = static_cast<std::size_t>(fft_size);
  if (signal_length < n) return 0;
  return 1 + (signal_length - n) / hop;
}

std::vector<double> analysis_window(const StftConfig& cfg) {
  cfg.validate();
  std::vector<double> w(static_cast<std::size_t>(cfg.fft_size), 0.0);
  const std::size_t offset = static_cast<std::size_t>(cfg.fft_size - cfg.win_length) / 2;
  const double n = cfg.win_length;
  for (int i = 0; i < cfg.win_length; ++i) {
    w[offset + static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return w;
}

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  if (w.empty()) throw ContractError("stft: empty waveform");
  const auto len = static_cast<long long>(w.size());
  const std::size_t n_fft = static_cast<std::size_t>(cfg.fft_size);
  const std::size_t frames = cfg.frames(w.size());
  if (frames == 0) throw ContractError("stft: signal shorter than fft_size with center=false");
  const long long pad = cfg.center ? cfg.fft_size / 2 : 0;

  const auto window = analysis_window(cfg);
  detail::RealFft fft(n_fft);
  std::vector<double> frame(n_fft);
  std::vector<std::complex<double>> spec(fft.bins());

  ComplexSpectrogram out{Matrix<std::complex<double>>(fft.bins(), frames), cfg,
                         SignalInfo{w.size(), w.sample_rate, w.gain_applied}};
  for (std::size_t f = 0; f < frames; ++f) {
    const long long start = static_cast<long long>(f) * cfg.hop_length - pad;
    for (std::size_t n = 0; n < n_fft; ++n) {
      if (window[n] == 0.0) {
        frame[n] = 0.0;
        continue;
      }
      const long long idx = start + static_cast<long long>(n);
      const long long src = (idx >= 0 && idx < len) ? idx : reflect_index(idx, len);
      frame[n] = src < 0 ? 0.0 : w.samples[static_cast<std::size_t>(src)] * window[n];
    }
    fft.forward(frame, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) out.values(k, f) = spec[k];
  }
  return out;
}

std::pair<MagnitudeSpectrogram, PhaseSpectrogram> magphase(const ComplexSpectrogram& c) {
  const auto rows = c.values.rows();
  const auto cols = c.values.cols();
  MagnitudeSpectrogram mag{RealMatrix(rows, cols), c.config, c.signal};
  PhaseSpectrogram phase{RealMatrix(rows, cols), c.config, c.signal};
  const auto src = c.values.flat();
  auto m = mag.values.flat();
  auto p = phase.values.flat();
  for (std::size_t i = 0; i < src.size(); ++i) {
    m[i] = std::abs(src[i]);
    // std::arg(0) is already 0 for +0; force it for -0 components too.
    p[i] = m[i] == 0.0 ? 0.0 : std::arg(src[i]);
  }
  return {std::move(mag), std::move(phase)};
}

ComplexSpectrogram recombine(const MagnitudeSpectrogram& mag, const PhaseSpectrogram& phase) {
  if (!mag.values.same_shape(phase.values)) throw ContractError("recombine: magnitude/phase shape mismatch");
  ComplexSpectrogram out{Matrix<std::complex<double>>(mag.values.rows(), mag.values.cols()),
                         mag.config, mag.signal};
  const auto m = mag.values.flat();
  const auto p = phase.values.flat();
  auto dst = out.values.flat();
  for (std::size_t i = 0; i < m.size(); ++i) dst[i] = std::polar(m[i], p[i]);
  return out;
}

Waveform istft(const ComplexSpectrogram& spec, std::size_t out_len) {
  const auto& cfg = spec.config;
  cfg.validate();
  const std::size_t n_fft = static_cast<std::size_t>(cfg.fft_size);
  if (spec.values.rows() != cfg.bins()) {
    throw ContractError("istft: spectrogram has " + std::to_string(spec.values.rows()) +
                        " bins, config expects " + std::to_string(cfg.bins()));
  }
  const std::size_t frames = spec.values.cols();
  const std::size_t hop = static_cast<std::size_t>(cfg.hop_length);
  const std::size_t pad = cfg.center ? n_fft / 2 : 0;
  const std::size_t span = frames == 0 ? 0 : (frames - 1) * hop + n_fft;

  const auto window = analysis_window(cfg);
  detail::RealFft fft(n_fft);
  std::vector<std::complex<double>> column(fft.bins());
  std::vector<double> frame(n_fft);
  std::vector<double> acc(span, 0.0);
  std::vector<double> envelope(span, 0.0);
  const double scale = 1.0 / static_cast<double>(n_fft);

  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t k = 0; k < column.size(); ++k) column[k] = spec.values(k, f);
    fft.inverse(column, frame);
    const std::size_t start = f * hop;
    for (std::size_t n = 0; n < n_fft; ++n) {
      acc[start + n] += frame[n] * scale * window[n];
      envelope[start + n] += window[n] * window[n];
    }
  }

  // Samples the frames are expected to reconstruct.
  std::size_t covered = spec.signal.length > 0 ? spec.signal.length
                                               : (frames == 0 ? 0 : (frames - 1) * hop + 1);
  covered = std::min(covered, out_len);

  Waveform out;
  out.sample_rate = spec.signal.sample_rate;
  out.gain_applied = spec.signal.gain_applied;
  out.samples.assign(out_len, 0.0);
  for (std::size_t t = 0; t < out_len; ++t) {
    const std::size_t p = t + pad;
    if (p >= span) break;
    if (envelope[p] < kMinEnvelope) {
      if (t < covered) {
        throw ConfigError("istft: window/hop pair is not invertible (zero overlap-add envelope at sample " +
                          std::to_string(t) + ")");
      }
      continue;
    }
    out.samples[t] = acc[p] / envelope[p];
  }
  return out;
}

Waveform istft(const MagnitudeSpectrogram& mag, const PhaseSpectrogram& phase, const StftConfig& cfg,
               std::size_t out_len) {
  if (!mag.values.same_shape(phase.values)) throw ContractError("istft: magnitude/phase shape mismatch");
  if (!(mag.config == cfg) || !(phase.config == cfg)) {
    throw ContractError("istft: spectrogram STFT config differs from the requested config");
  }
  return istft(recombine(mag, phase), out_len);
}

}  // namespace dgmo
