#include "dgmo/mixkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "dgmo/errors.hpp"
#include "fft.hpp"

namespace dgmo {
namespace {

using nlohmann::json;

constexpr double kSynthRms = 0.1;
constexpr int kToneCount = 8;

Waveform padded_to(const Waveform& w, std::size_t length) {
  Waveform out = w;
  out.samples.resize(length, 0.0);
  return out;
}

void scale_in_place(Waveform& w, double g) {
  for (double& s : w.samples) s *= g;
  w.gain_applied *= g;
}

void normalize_rms(std::vector<double>& x, double rms) {
  const double current = std::sqrt(energy(x) / static_cast<double>(x.size()));
  if (current > 0.0) {
    for (double& s : x) s *= rms / current;
  }
}

}  // namespace

Mixture mix_at_snr(const MixtureSpec& spec) {
  if (!std::isfinite(spec.snr_db)) throw ContractError("mix_at_snr: snr_db must be finite");
  if (spec.target.sample_rate != spec.background.sample_rate ||
      (spec.noise && spec.noise->sample_rate != spec.target.sample_rate)) {
    throw ContractError("mix_at_snr: stems have different sample rates");
  }
  const std::size_t length = std::max(spec.target.size(), spec.background.size());
  Mixture out;
  out.target = padded_to(spec.target, length);
  out.background = padded_to(spec.background, length);

  const double e_target = energy(out.target.samples);
  const double e_background = energy(out.background.samples);
  if (e_target == 0.0) throw DomainError("mix_at_snr: target stem is silent");
  if (e_background == 0.0) throw DomainError("mix_at_snr: background stem is silent");

  // 10 log10(E_t / (g^2 E_b)) = snr  =>  g = sqrt(E_t / (E_b 10^(snr/10)))
  const double g = std::sqrt(e_target / (e_background * std::pow(10.0, spec.snr_db / 10.0)));
  out.background_scale = g;
  if (g != 1.0) {
    for (double& s : out.background.samples) s *= g;
  }

  out.mixture.sample_rate = out.target.sample_rate;
  out.mixture.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) out.mixture.samples[i] = out.target.samples[i] + out.background.samples[i];
  if (spec.noise) {
    const auto noise = padded_to(*spec.noise, length);
    for (std::size_t i = 0; i < length; ++i) out.mixture.samples[i] += noise.samples[i];
  }
  return out;
}

Waveform clip_normalize(const Waveform& w, double peak) {
  if (!(peak > 0.0)) throw ConfigError("clip_normalize: peak must be positive");
  const double current = peak_abs(w.samples);
  if (current <= 1.0) return w;
  Waveform out = w;
  scale_in_place(out, peak / current);
  return out;
}

Mixture clip_normalize(const Mixture& m, double peak) {
  if (!(peak > 0.0)) throw ConfigError("clip_normalize: peak must be positive");
  const double current = peak_abs(m.mixture.samples);
  if (current <= 1.0) return m;
  const double g = peak / current;
  Mixture out = m;
  const Waveform noise_part = [&] {
    // Whatever the mixture holds beyond the two stems (environmental noise).
    Waveform n = m.mixture;
    for (std::size_t i = 0; i < n.size(); ++i) n.samples[i] -= m.target.samples[i] + m.background.samples[i];
    return n;
  }();
  scale_in_place(out.target, g);
  scale_in_place(out.background, g);
  out.mixture.gain_applied = m.mixture.gain_applied * g;
  for (std::size_t i = 0; i < out.mixture.size(); ++i) {
    out.mixture.samples[i] = out.target.samples[i] + out.background.samples[i] + noise_part.samples[i] * g;
  }
  return out;
}

double rms_dbfs(const Waveform& w) {
  if (w.empty()) throw DomainError("rms_dbfs: empty waveform");
  const double rms = std::sqrt(energy(w.samples) / static_cast<double>(w.size()));
  if (rms == 0.0) throw DomainError("rms_dbfs: silent waveform");
  return 20.0 * std::log10(rms);
}

Waveform scale_to_rms_dbfs(const Waveform& w, double dbfs) {
  Waveform out = w;
  scale_in_place(out, std::pow(10.0, (dbfs - rms_dbfs(w)) / 20.0));
  return out;
}

Waveform synth_source(SourceKind kind, Band band, double duration_s, int sample_rate, std::uint64_t seed) {
  if (sample_rate <= 0) throw ConfigError("synth_source: sample_rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(band.lo_hz >= 0.0) || !(band.lo_hz < band.hi_hz) || band.hi_hz > nyquist) {
    throw ConfigError("synth_source: need 0 <= f_lo < f_hi <= sr/2, got [" + std::to_string(band.lo_hz) + ", " +
                      std::to_string(band.hi_hz) + "]");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  if (n < 2) throw ConfigError("synth_source: duration too short");

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(n, 0.0);
  std::mt19937_64 rng(seed);

  switch (kind) {
    case SourceKind::band_noise: {
      // FFT length is even so the Nyquist bin exists.
      const std::size_t len = n + (n % 2);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> noise(len);
      for (double& v : noise) v = normal(rng);
      detail::RealFft fft(len);
      std::vector<std::complex<double>> spec(fft.bins());
      fft.forward(noise, spec);
      const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(len);
      for (std::size_t k = 0; k < spec.size(); ++k) {
        const double f = static_cast<double>(k) * bin_hz;
        if (f < band.lo_hz || f > band.hi_hz) spec[k] = 0.0;
      }
      fft.inverse(spec, noise);
      std::copy_n(noise.begin(), n, w.samples.begin());
      break;
    }
    case SourceKind::tone_stack: {
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      const double width = band.hi_hz - band.lo_hz;
      for (int t = 0; t < kToneCount; ++t) {
        // Tones at the centers of kToneCount equal sub-bands.
        const double f = band.lo_hz + width * (t + 0.5) / kToneCount;
        const double ph = phase(rng);
        const double omega = 2.0 * std::numbers::pi * f / sample_rate;
        for (std::size_t i = 0; i < n; ++i) w.samples[i] += std::sin(omega * static_cast<double>(i) + ph);
      }
      break;
    }
    case SourceKind::chirp: {
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      const double ph = phase(rng);
      const double duration = static_cast<double>(n) / sample_rate;
      const double sweep = (band.hi_hz - band.lo_hz) / duration;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        w.samples[i] = std::sin(2.0 * std::numbers::pi * (band.lo_hz * t + 0.5 * sweep * t * t) + ph);
      }
      break;
    }
  }
  normalize_rms(w.samples, kSynthRms);
  return w;
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw FormatError("manifest " + path.string() + ": top level must be an array");

  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  std::vector<ManifestRow> rows;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    try {
      ManifestRow row;
      row.id = item.at("id").get<std::string>();
      row.target = resolve(item.at("target").get<std::string>());
      row.background = resolve(item.at("background").get<std::string>());
      row.snr_db = item.value("snr_db", 0.0);
      row.query = item.value("query", std::string{});
      row.seed = item.value("seed", std::uint64_t{0});
      if (item.contains("rms_dbfs")) {
        const auto& r = item.at("rms_dbfs");
        row.rms_dbfs = std::make_pair(r.at(0).get<double>(), r.at(1).get<double>());
      }
      if (row.id.empty() || row.id.find_first_of("/\\") != std::string::npos || row.id == "." || row.id == "..") {
        throw FormatError("invalid id '" + row.id + "'");
      }
      if (!seen.insert(row.id).second) throw FormatError("duplicate id '" + row.id + "'");
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw FormatError("manifest row " + std::to_string(i) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest row " + std::to_string(i) + ": " + e.what());
    }
  }
  return rows;
}

void materialize_row(const ManifestRow& row, const std::filesystem::path& out_dir, int sample_rate) {
  Waveform target = load_waveform(row.target, sample_rate);
  const Waveform background = load_waveform(row.background, sample_rate);

  double target_level = std::nan("");
  if (row.rms_dbfs) {
    const auto [lo, hi] = *row.rms_dbfs;
    if (!(lo <= hi)) throw ConfigError("row " + row.id + ": rms_dbfs range is reversed");
    std::mt19937_64 rng(row.seed);
    target_level = std::uniform_real_distribution<double>(lo, hi)(rng);
    target = scale_to_rms_dbfs(target, target_level);
  }

  MixtureSpec spec{target, background, row.snr_db, std::nullopt, 0.9};
  const Mixture mixed = clip_normalize(mix_at_snr(spec), spec.clip_peak);

  const auto dir = out_dir / row.id;
  std::filesystem::create_directories(dir);
  save_waveform(dir / "mixture.wav", mixed.mixture);
  save_waveform(dir / "target.wav", mixed.target);
  save_waveform(dir / "background.wav", mixed.background);

  json meta = {
      {"id", row.id},
      {"query", row.query},
      {"target_source", row.target.string()},
      {"background_source", row.background.string()},
      {"snr_db", row.snr_db},
      {"seed", row.seed},
      {"sample_rate", sample_rate},
      {"samples", mixed.mixture.size()},
      {"background_scale", mixed.background_scale},
      {"clip_gain", mixed.mixture.gain_applied},
  };
  if (row.rms_dbfs) meta["target_rms_dbfs"] = target_level;
  std::ofstream os(dir / "meta.json");
  if (!os) throw IoError("cannot write " + (dir / "meta.json").string());
  os << meta.dump(2) << '\n';
}

}  // namespace dgmo
