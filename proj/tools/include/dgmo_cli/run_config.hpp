#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dgmo/mask_optim.hpp"
#include "dgmo/mel.hpp"
#include "dgmo/stft.hpp"

namespace dgmo::cli {

enum class ProviderKind { file, oracle, diffusion_exec };

// Everything `dgmo separate` needs. JSON keys mirror the long flag names with
// '-' replaced by '_'; the STFT and mel blocks nest under "stft" / "mel".
struct RunConfig {
  StftConfig stft;
  MelConfig mel;
  OptimizerConfig optimizer;
  int sample_rate = kDefaultSampleRate;
  double clip_seconds = kDefaultClipSeconds;

  std::filesystem::path mixture;
  std::string query;
  std::filesystem::path out;
  ProviderKind provider = ProviderKind::file;

  // provider = file: a .dgm1 file, or a directory laid out as <dir>/<mixture_id>/<query_slug>.dgm1
  std::filesystem::path refs;
  // provider = oracle
  std::filesystem::path target;
  double jitter_db = 0.0;
  // provider = diffusion-exec
  std::filesystem::path refgen_bin;
  double refgen_ratio = 0.7;
  int refgen_steps = 25;
  std::string refgen_mode = "ddim_inversion";

  int jobs = 1;

  // Throws ConfigError when a provider's required inputs are missing or a
  // nested config is invalid.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
// Overlays keys present in `j` onto `base`. Unknown keys are a ConfigError.
RunConfig apply_json(const nlohmann::json& j, RunConfig base);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

ProviderKind parse_provider(const std::string& s);
std::string to_string(ProviderKind p);
MelDomain parse_domain(const std::string& s);

}  // namespace dgmo::cli
