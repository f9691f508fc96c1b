#include "dgmo/providers.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <string>
#include <vector>

#include "dgmo/errors.hpp"
#include "dgmo/refio.hpp"

extern char** environ;

namespace dgmo {

FileProvider::FileProvider(std::filesystem::path path) : path_(std::move(path)) {}

ReferenceSet FileProvider::references(const ProviderRequest&) {
  if (!cached_) cached_ = read_refset(path_);
  return *cached_;
}

OracleProvider::OracleProvider(Waveform target, MelConfig mel, StftConfig stft, double jitter_db)
    : target_(std::move(target)), mel_(mel), stft_(stft), jitter_db_(jitter_db) {}

ReferenceSet OracleProvider::references(const ProviderRequest& request) {
  return oracle_refs(target_, mel_, stft_, request.n_refs, jitter_db_, request.seed);
}

ExecProvider::ExecProvider(ExecProviderConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.executable.empty()) throw ConfigError("diffusion-exec provider needs a reference generator executable");
  if (!std::filesystem::exists(cfg_.executable)) {
    throw ConfigError("reference generator not found: " + cfg_.executable.string());
  }
  if (cfg_.work_dir.empty()) {
    static std::atomic<int> counter{0};
    cfg_.work_dir = std::filesystem::temp_directory_path() /
                    ("dgmo-refgen-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  }
}

ReferenceSet ExecProvider::references(const ProviderRequest& request) {
  std::filesystem::create_directories(cfg_.work_dir);
  const auto tag = "iter" + std::to_string(request.iteration);
  const auto wav = cfg_.work_dir / (tag + "_input.wav");
  const auto out = cfg_.work_dir / (tag + "_refs.dgm1");
  std::filesystem::remove(out);
  save_waveform(wav, request.estimate, WavEncoding::float32);

  char ratio[32];
  std::snprintf(ratio, sizeof ratio, "%.17g", cfg_.noising_ratio);
  std::vector<std::string> args = {cfg_.executable.string(),
                                   "--mixture", wav.string(),
                                   "--query", cfg_.query,
                                   "--n", std::to_string(request.n_refs),
                                   "--ratio", ratio,
                                   "--steps", std::to_string(cfg_.ddim_steps),
                                   "--mode", cfg_.mode,
                                   "--out", out.string()};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ);
  if (rc != 0) throw ProviderError("cannot start " + args[0] + ": error " + std::to_string(rc));
  int status = 0;
  if (::waitpid(pid, &status, 0) < 0) throw ProviderError("waitpid failed for " + args[0]);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw ProviderError(args[0] + " exited with status " + std::to_string(code));
  }
  if (!std::filesystem::exists(out)) throw ProviderError(args[0] + " exited 0 but wrote no " + out.string());
  return read_refset(out);
}

}  // namespace dgmo
