#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "dgmo/errors.hpp"
#include "dgmo_cli/commands.hpp"
#include "exit_codes.hpp"

namespace dgmo::cli {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dgmo: language-queried source separation by mel-guided mask optimization"};
  app.require_subcommand(1);

  // mix
  MixOptions mix;
  auto* mix_cmd = app.add_subcommand("mix", "Materialize evaluation mixtures from a JSON manifest");
  mix_cmd->add_option("--manifest", mix.manifest, "Manifest: JSON array of {id, target, background, snr_db, query, seed}")
      ->required();
  mix_cmd->add_option("--out", mix.out_dir, "Output root; writes <out>/<id>/{mixture,target,background}.wav + meta.json")
      ->required();
  mix_cmd->add_option("--jobs", mix.jobs, "Worker threads")->check(CLI::PositiveNumber);

  // separate
  std::string config_path, provider, loss_domain, refgen_bin, mixture, query, refs, out_dir, target, refgen_mode;
  int jobs = 1, epochs = 0, iterations = 0, n_refs = 0, refgen_steps = 0;
  std::uint64_t seed = 0;
  double lr = 0.0, jitter_db = 0.0, refgen_ratio = 0.0;
  auto* sep = app.add_subcommand("separate", "Separate the source described by --query from --mixture");
  auto* o_config = sep->add_option("--config", config_path, "JSON config (keys mirror flags; flags override)");
  auto* o_mixture = sep->add_option("--mixture", mixture, "Mixture WAV");
  auto* o_query = sep->add_option("--query", query, "Text query describing the target");
  auto* o_refs = sep->add_option("--refs", refs, "DGM1 reference file, or refs dir (<dir>/<mixture_id>/<query_slug>.dgm1)");
  auto* o_provider = sep->add_option("--provider", provider, "Reference provider")
                         ->check(CLI::IsMember({"file", "oracle", "diffusion-exec"}));
  auto* o_refgen = sep->add_option("--refgen-bin", refgen_bin, "Reference generator executable (env DGMO_REFGEN_BIN)");
  auto* o_out = sep->add_option("--out", out_dir, "Output directory");
  auto* o_jobs = sep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* o_seed = sep->add_option("--seed", seed, "Seed passed to the reference provider");
  auto* o_lr = sep->add_option("--lr", lr, "Learning rate on mask logits");
  auto* o_epochs = sep->add_option("--epochs", epochs, "Epochs per iteration");
  auto* o_iterations = sep->add_option("--iterations", iterations, "Reference regeneration rounds");
  auto* o_nrefs = sep->add_option("--n-refs", n_refs, "References per round");
  auto* o_domain = sep->add_option("--loss-domain", loss_domain, "Mel loss domain")
                       ->check(CLI::IsMember({"log", "linear"}));
  auto* o_target = sep->add_option("--target", target, "Ground-truth target WAV (provider=oracle)");
  auto* o_jitter = sep->add_option("--jitter-db", jitter_db, "Oracle reference jitter, dB stddev");
  auto* o_ratio = sep->add_option("--refgen-ratio", refgen_ratio, "Noising step ratio passed to the generator");
  auto* o_steps = sep->add_option("--refgen-steps", refgen_steps, "DDIM steps passed to the generator");
  auto* o_mode = sep->add_option("--refgen-mode", refgen_mode, "Generator mode (ddim_inversion|random_noise)");

  // eval
  EvalOptions eval;
  std::string report;
  auto* eval_cmd = app.add_subcommand("eval", "Score separated outputs against ground truth");
  eval_cmd->add_option("--est", eval.est_dir, "Estimates: <est>/<id>/separated.wav or <est>/<id>.wav")->required();
  eval_cmd->add_option("--truth", eval.truth_dir, "Ground truth laid out by `dgmo mix`")->required();
  auto* o_report = eval_cmd->add_option("--report", report, "CSV report path (default stdout)");
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads")->check(CLI::PositiveNumber);

  // selftest
  SelftestOptions selftest;
  auto* self_cmd = app.add_subcommand("selftest", "Run built-in numerical checks");
  self_cmd->add_flag("--inject-failure", selftest.inject_failure, "Force one check to fail")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*mix_cmd) return cmd_mix(mix, out, err);
  if (*eval_cmd) {
    if (*o_report) eval.report = report;
    return cmd_eval(eval, out, err);
  }
  if (*self_cmd) return cmd_selftest(selftest, out);

  RunConfig cfg;
  try {
    if (*o_config) cfg = load_run_config(config_path, cfg);
    if (*o_mixture) cfg.mixture = mixture;
    if (*o_query) cfg.query = query;
    if (*o_refs) cfg.refs = refs;
    if (*o_provider) cfg.provider = parse_provider(provider);
    if (*o_refgen) cfg.refgen_bin = refgen_bin;
    if (*o_out) cfg.out = out_dir;
    if (*o_jobs) cfg.jobs = jobs;
    if (*o_seed) cfg.optimizer.seed = seed;
    if (*o_lr) cfg.optimizer.learning_rate = lr;
    if (*o_epochs) cfg.optimizer.epochs_per_iteration = epochs;
    if (*o_iterations) cfg.optimizer.iterations = iterations;
    if (*o_nrefs) cfg.optimizer.n_refs = n_refs;
    if (*o_domain) {
      cfg.optimizer.loss_domain = parse_domain(loss_domain);
      cfg.mel.loss_domain = cfg.optimizer.loss_domain;
    }
    if (*o_target) cfg.target = target;
    if (*o_jitter) cfg.jitter_db = jitter_db;
    if (*o_ratio) cfg.refgen_ratio = refgen_ratio;
    if (*o_steps) cfg.refgen_steps = refgen_steps;
    if (*o_mode) cfg.refgen_mode = refgen_mode;
    if (cfg.refgen_bin.empty()) {
      if (const char* env = std::getenv("DGMO_REFGEN_BIN"); env && *env) cfg.refgen_bin = env;
    }
  } catch (const Error& e) {
    err << "separate: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return cmd_separate(cfg, out, err);
}

}  // namespace dgmo::cli
