#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dgmo/mask_optim.hpp"

namespace dgmo {

// Returns one fixed set every iteration.
class FixedProvider : public ReferenceProvider {
 public:
  explicit FixedProvider(ReferenceSet refs) : refs_(std::move(refs)) {}
  ReferenceSet references(const ProviderRequest&) override { return refs_; }

 private:
  ReferenceSet refs_;
};

// Reads a DGM1 file once and serves it every iteration.
class FileProvider : public ReferenceProvider {
 public:
  explicit FileProvider(std::filesystem::path path);
  ReferenceSet references(const ProviderRequest& request) override;

 private:
  std::filesystem::path path_;
  std::optional<ReferenceSet> cached_;
};

// Mel of a known target; test oracle for reference generation.
class OracleProvider : public ReferenceProvider {
 public:
  OracleProvider(Waveform target, MelConfig mel, StftConfig stft, double jitter_db = 0.0);
  ReferenceSet references(const ProviderRequest& request) override;

 private:
  Waveform target_;
  MelConfig mel_;
  StftConfig stft_;
  double jitter_db_;
};

struct ExecProviderConfig {
  std::filesystem::path executable;
  std::string query;
  double noising_ratio = 0.7;
  int ddim_steps = 25;
  std::string mode = "ddim_inversion";
  // Scratch directory for the exchanged WAV/DGM1 files.
  std::filesystem::path work_dir;
};

// Runs the external reference generator:
//   <exe> --mixture <wav> --query <q> --n <n> --ratio <r> --steps <s> --mode <m> --out <dgm1>
// Each iteration writes the current estimate as the --mixture input.
class ExecProvider : public ReferenceProvider {
 public:
  explicit ExecProvider(ExecProviderConfig cfg);
  ReferenceSet references(const ProviderRequest& request) override;

 private:
  ExecProviderConfig cfg_;
};

}  // namespace dgmo
