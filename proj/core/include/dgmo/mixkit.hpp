#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgmo/waveform.hpp"

namespace dgmo {

struct MixtureSpec {
  Waveform target;
  Waveform background;
  double snr_db = 0.0;
  std::optional<Waveform> noise;  // additive environmental noise, mixed unscaled
  double clip_peak = 0.9;
};

struct Mixture {
  Waveform mixture;
  Waveform target;      // post-scaling stems, so metrics see the true references
  Waveform background;
  double background_scale = 1.0;
};

// Scales the background so 10 log10(E_target / E_background) == snr_db and
// sums the stems. The shorter stem is zero-padded at the end. Clipping is
// not handled here; see clip_normalize.
Mixture mix_at_snr(const MixtureSpec& spec);

// If max |sample| > 1, rescale so max |sample| == peak (gain recorded in
// gain_applied); otherwise identity.
Waveform clip_normalize(const Waveform& w, double peak = 0.9);

// Applies clip_normalize's gain decision for the mixture to all three signals,
// then rebuilds the mixture from the scaled stems so the sum stays exact.
Mixture clip_normalize(const Mixture& m, double peak = 0.9);

// Scales to a target RMS level in dBFS (full scale = 1.0).
Waveform scale_to_rms_dbfs(const Waveform& w, double dbfs);
double rms_dbfs(const Waveform& w);

enum class SourceKind { band_noise, tone_stack, chirp };

struct Band {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

// Deterministic synthetic test sources. band_noise is white Gaussian noise with
// every FFT bin outside [lo, hi] zeroed; tone_stack sums 8 random-phase
// sinusoids spread inside the band; chirp sweeps linearly lo -> hi. Outputs are
// scaled to 0.1 RMS.
Waveform synth_source(SourceKind kind, Band band, double duration_s, int sample_rate,
                      std::uint64_t seed);

// One manifest row: {id, target, background, snr_db, query, seed}. Optional
// "rms_dbfs": [lo, hi] samples the target level uniformly (seeded).
struct ManifestRow {
  std::string id;
  std::filesystem::path target;
  std::filesystem::path background;
  double snr_db = 0.0;
  std::string query;
  std::uint64_t seed = 0;
  std::optional<std::pair<double, double>> rms_dbfs;
};

// Parses a manifest JSON array; relative paths resolve against the manifest's
// directory. Throws FormatError on malformed rows and duplicate ids.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

// Builds one mixture and writes <out_dir>/<id>/{mixture,target,background}.wav
// plus meta.json.
void materialize_row(const ManifestRow& row, const std::filesystem::path& out_dir,
                     int sample_rate = kDefaultSampleRate);

}  // namespace dgmo
