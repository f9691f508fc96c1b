#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dgmo/mask_optim.hpp"
#include "dgmo/reference_set.hpp"

// DGM1 container:
//   "DGM1" | u32 LE header length | UTF-8 JSON header | count x (rows x cols) f32 LE
// Reference sets and masks share the container; the header "kind" field
// tells them apart.

namespace dgmo {

inline constexpr int kDgm1Version = 1;

enum class Dgm1Kind { reference_set, mask };

struct RefFileHeader {
  int version = kDgm1Version;
  Dgm1Kind kind = Dgm1Kind::reference_set;
  std::size_t count = 0;
  std::size_t rows = 0;  // n_mels for reference sets, bins for masks
  std::size_t cols = 0;  // frames
  MelConfig mel_config;  // loss_domain doubles as the payload domain
  StftConfig stft_config;
  int sample_rate = kDefaultSampleRate;
  Provenance provenance;
};

// Atomic (temp file + rename). Values are narrowed to f32, so the round trip
// is bitwise only for f32-representable sets, which is what read_refset and
// oracle_refs produce.
void write_refset(const ReferenceSet& refs, const std::filesystem::path& path);
ReferenceSet read_refset(const std::filesystem::path& path);

// Reads and validates only the header.
RefFileHeader read_dgm1_header(const std::filesystem::path& path);

// Single-matrix variant holding final mask values (sigmoid of the logits).
void write_mask(const Mask& m, const StftConfig& stft, int sample_rate,
                const std::filesystem::path& path);
RealMatrix read_mask_values(const std::filesystem::path& path);

// Rounds every mel value to the nearest f32.
void quantize_f32(ReferenceSet& refs);

// Mel of the target's magnitude spectrogram, n copies, each with independent
// per-cell log-normal jitter of `jitter_db` dB standard deviation (amplitude
// dB, applied before the log). Values are f32-quantized.
ReferenceSet oracle_refs(const Waveform& target, const MelConfig& mcfg, const StftConfig& scfg,
                         int n, double jitter_db, std::uint64_t seed);

// Lowercase, runs of non-alphanumerics collapsed to '_', trimmed.
std::string query_slug(std::string_view query);

// <refs_dir>/<mixture_id>/<query_slug>.dgm1
std::filesystem::path reference_path(const std::filesystem::path& refs_dir,
                                     std::string_view mixture_id, std::string_view query);

}  // namespace dgmo
