#include "dgmo_cli/run_config.hpp"

#include <fstream>
#include <set>

#include "dgmo/errors.hpp"

namespace dgmo::cli {

using nlohmann::json;

ProviderKind parse_provider(const std::string& s) {
  if (s == "file") return ProviderKind::file;
  if (s == "oracle") return ProviderKind::oracle;
  if (s == "diffusion-exec") return ProviderKind::diffusion_exec;
  throw ConfigError("unknown provider '" + s + "' (expected file, oracle or diffusion-exec)");
}

std::string to_string(ProviderKind p) {
  switch (p) {
    case ProviderKind::file: return "file";
    case ProviderKind::oracle: return "oracle";
    case ProviderKind::diffusion_exec: return "diffusion-exec";
  }
  return "file";
}

MelDomain parse_domain(const std::string& s) {
  if (s == "log") return MelDomain::log;
  if (s == "linear") return MelDomain::linear;
  throw ConfigError("unknown loss domain '" + s + "' (expected log or linear)");
}

namespace {

std::string domain_name(MelDomain d) { return d == MelDomain::log ? "log" : "linear"; }

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  stft.validate();
  mel.validate(sample_rate);
  optimizer.validate();
  if (!(clip_seconds > 0.0)) throw ConfigError("clip_seconds must be positive");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (mixture.empty()) throw ConfigError("--mixture is required");
  if (out.empty()) throw ConfigError("--out is required");
  switch (provider) {
    case ProviderKind::file:
      if (refs.empty()) throw ConfigError("provider=file requires --refs");
      break;
    case ProviderKind::oracle:
      if (target.empty()) throw ConfigError("provider=oracle requires --target");
      break;
    case ProviderKind::diffusion_exec:
      if (refgen_bin.empty()) {
        throw ConfigError("provider=diffusion-exec requires --refgen-bin or DGMO_REFGEN_BIN");
      }
      if (!(refgen_ratio >= 0.0 && refgen_ratio <= 1.0)) throw ConfigError("refgen_ratio must be in [0, 1]");
      break;
  }
}

json to_json(const RunConfig& c) {
  const auto& o = c.optimizer;
  return json{
      {"mixture", c.mixture.string()},
      {"query", c.query},
      {"out", c.out.string()},
      {"provider", to_string(c.provider)},
      {"refs", c.refs.string()},
      {"target", c.target.string()},
      {"jitter_db", c.jitter_db},
      {"refgen_bin", c.refgen_bin.string()},
      {"refgen_ratio", c.refgen_ratio},
      {"refgen_steps", c.refgen_steps},
      {"refgen_mode", c.refgen_mode},
      {"jobs", c.jobs},
      {"seed", o.seed},
      {"lr", o.learning_rate},
      {"epochs", o.epochs_per_iteration},
      {"iterations", o.iterations},
      {"n_refs", o.n_refs},
      {"loss_domain", domain_name(o.loss_domain)},
      {"mask_init", o.mask_init == MaskInit::half ? "half" : "ones"},
      {"step_rule", o.step_rule == StepRule::adam ? "adam" : "gradient_descent"},
      {"adam_beta1", o.adam_beta1},
      {"adam_beta2", o.adam_beta2},
      {"adam_epsilon", o.adam_epsilon},
      {"sample_rate", c.sample_rate},
      {"clip_seconds", c.clip_seconds},
      {"stft",
       {{"fft_size", c.stft.fft_size},
        {"win_length", c.stft.win_length},
        {"hop_length", c.stft.hop_length},
        {"window", "hann"},
        {"center", c.stft.center}}},
      {"mel",
       {{"n_mels", c.mel.n_mels},
        {"f_min", c.mel.f_min},
        {"f_max", c.mel.resolved_f_max(c.sample_rate)},
        {"mel_scale", c.mel.mel_scale == MelScale::htk ? "htk" : "slaney"},
        {"filter_norm", c.mel.filter_norm == FilterNorm::none ? "none" : "slaney_area"},
        {"log_floor", c.mel.log_floor}}},
  };
}

RunConfig apply_json(const json& j, RunConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j,
             {"mixture", "query", "out", "provider", "refs", "target", "jitter_db", "refgen_bin", "refgen_ratio",
              "refgen_steps", "refgen_mode", "jobs", "seed", "lr", "epochs", "iterations", "n_refs", "loss_domain",
              "mask_init", "step_rule", "adam_beta1", "adam_beta2", "adam_epsilon", "sample_rate", "clip_seconds",
              "stft", "mel"},
             "");
  try {
    if (j.contains("mixture")) c.mixture = j["mixture"].get<std::string>();
    if (j.contains("query")) c.query = j["query"].get<std::string>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("provider")) c.provider = parse_provider(j["provider"].get<std::string>());
    if (j.contains("refs")) c.refs = j["refs"].get<std::string>();
    if (j.contains("target")) c.target = j["target"].get<std::string>();
    if (j.contains("jitter_db")) c.jitter_db = j["jitter_db"].get<double>();
    if (j.contains("refgen_bin")) c.refgen_bin = j["refgen_bin"].get<std::string>();
    if (j.contains("refgen_ratio")) c.refgen_ratio = j["refgen_ratio"].get<double>();
    if (j.contains("refgen_steps")) c.refgen_steps = j["refgen_steps"].get<int>();
    if (j.contains("refgen_mode")) c.refgen_mode = j["refgen_mode"].get<std::string>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
    auto& o = c.optimizer;
    if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("lr")) o.learning_rate = j["lr"].get<double>();
    if (j.contains("epochs")) o.epochs_per_iteration = j["epochs"].get<int>();
    if (j.contains("iterations")) o.iterations = j["iterations"].get<int>();
    if (j.contains("n_refs")) o.n_refs = j["n_refs"].get<int>();
    if (j.contains("loss_domain")) {
      o.loss_domain = parse_domain(j["loss_domain"].get<std::string>());
      c.mel.loss_domain = o.loss_domain;
    }
    if (j.contains("mask_init")) {
      const auto s = j["mask_init"].get<std::string>();
      if (s != "half" && s != "ones") throw ConfigError("mask_init must be half or ones");
      o.mask_init = s == "half" ? MaskInit::half : MaskInit::ones;
    }
    if (j.contains("step_rule")) {
      const auto s = j["step_rule"].get<std::string>();
      if (s != "adam" && s != "gradient_descent") throw ConfigError("step_rule must be adam or gradient_descent");
      o.step_rule = s == "adam" ? StepRule::adam : StepRule::gradient_descent;
    }
    if (j.contains("adam_beta1")) o.adam_beta1 = j["adam_beta1"].get<double>();
    if (j.contains("adam_beta2")) o.adam_beta2 = j["adam_beta2"].get<double>();
    if (j.contains("adam_epsilon")) o.adam_epsilon = j["adam_epsilon"].get<double>();
    if (j.contains("sample_rate")) c.sample_rate = j["sample_rate"].get<int>();
    if (j.contains("clip_seconds")) c.clip_seconds = j["clip_seconds"].get<double>();
    if (j.contains("stft")) {
      const auto& s = j["stft"];
      check_keys(s, {"fft_size", "win_length", "hop_length", "window", "center"}, "stft.");
      if (s.contains("fft_size")) c.stft.fft_size = s["fft_size"].get<int>();
      if (s.contains("win_length")) c.stft.win_length = s["win_length"].get<int>();
      if (s.contains("hop_length")) c.stft.hop_length = s["hop_length"].get<int>();
      if (s.contains("window") && s["window"].get<std::string>() != "hann") throw ConfigError("only the hann window is supported");
      if (s.contains("center")) c.stft.center = s["center"].get<bool>();
    }
    if (j.contains("mel")) {
      const auto& m = j["mel"];
      check_keys(m, {"n_mels", "f_min", "f_max", "mel_scale", "filter_norm", "log_floor"}, "mel.");
      if (m.contains("n_mels")) c.mel.n_mels = m["n_mels"].get<int>();
      if (m.contains("f_min")) c.mel.f_min = m["f_min"].get<double>();
      if (m.contains("f_max")) c.mel.f_max = m["f_max"].get<double>();
      if (m.contains("mel_scale")) {
        const auto s = m["mel_scale"].get<std::string>();
        if (s != "htk" && s != "slaney") throw ConfigError("mel_scale must be htk or slaney");
        c.mel.mel_scale = s == "htk" ? MelScale::htk : MelScale::slaney;
      }
      if (m.contains("filter_norm")) {
        const auto s = m["filter_norm"].get<std::string>();
        if (s != "none" && s != "slaney_area") throw ConfigError("filter_norm must be none or slaney_area");
        c.mel.filter_norm = s == "none" ? FilterNorm::none : FilterNorm::slaney_area;
      }
      if (m.contains("log_floor")) c.mel.log_floor = m["log_floor"].get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.mel.loss_domain = c.optimizer.loss_domain;
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  // A meta.json written by `separate` carries the full config under "config".
  if (j.is_object() && j.contains("dgmo_meta_version") && j.contains("config")) return apply_json(j["config"], std::move(base));
  return apply_json(j, std::move(base));
}

}  // namespace dgmo::cli
