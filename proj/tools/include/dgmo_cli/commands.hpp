#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "dgmo_cli/run_config.hpp"

namespace dgmo::cli {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

struct MixOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  int jobs = 1;
};

struct EvalOptions {
  std::filesystem::path est_dir;
  std::filesystem::path truth_dir;
  std::optional<std::filesystem::path> report;  // stdout when unset
  int jobs = 1;
};

struct SelftestOptions {
  // Tightens one tolerance below what any real computation can meet, to
  // prove the harness reports failures.
  bool inject_failure = false;
};

int cmd_mix(const MixOptions& opts, std::ostream& out, std::ostream& err);
int cmd_separate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_selftest(const SelftestOptions& opts, std::ostream& out);

// Full command-line entry point (argv[0] included).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dgmo::cli
