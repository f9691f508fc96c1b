#include <chrono>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dgmo/errors.hpp"
#include "dgmo/mask_optim.hpp"
#include "dgmo/providers.hpp"
#include "dgmo/refio.hpp"
#include "dgmo_cli/commands.hpp"
#include "exit_codes.hpp"

namespace dgmo::cli {
namespace {

using nlohmann::json;

constexpr int kMetaVersion = 1;

// Serves a reference set fetched ahead of time for iteration 1 (so headers can
// be checked before any optimization work) and delegates afterwards.
class PrefetchedProvider : public ReferenceProvider {
 public:
  PrefetchedProvider(ReferenceProvider& inner, ReferenceSet first) : inner_(inner), first_(std::move(first)) {}

  ReferenceSet references(const ProviderRequest& request) override {
    if (request.iteration == 1 && first_) {
      ReferenceSet out = std::move(*first_);
      first_.reset();
      return out;
    }
    return inner_.references(request);
  }

 private:
  ReferenceProvider& inner_;
  std::optional<ReferenceSet> first_;
};

void check_header(const ReferenceSet& refs, const RunConfig& cfg, std::size_t frames) {
  if (!(refs.stft_config == cfg.stft)) {
    throw ContractError("reference header STFT config (fft " + std::to_string(refs.stft_config.fft_size) + ", win " +
                        std::to_string(refs.stft_config.win_length) + ", hop " +
                        std::to_string(refs.stft_config.hop_length) + ") differs from the run's (fft " +
                        std::to_string(cfg.stft.fft_size) + ", win " + std::to_string(cfg.stft.win_length) +
                        ", hop " + std::to_string(cfg.stft.hop_length) + ")");
  }
  if (refs.sample_rate != cfg.sample_rate) {
    throw ContractError("reference header sample rate " + std::to_string(refs.sample_rate) + " differs from the run's " +
                        std::to_string(cfg.sample_rate));
  }
  if (refs.frames() != frames) {
    throw ContractError("reference header has " + std::to_string(refs.frames()) + " frames, mixture spectrogram has " +
                        std::to_string(frames));
  }
}

// Pads/normalizes a companion signal exactly like the mixture so both share
// one scale.
Waveform align_to_mixture(const Waveform& w, const Waveform& padded_mixture, double clip_seconds) {
  Waveform out = pad_and_normalize(w, clip_seconds, 1.0);
  out = undo_gain(out);
  for (double& s : out.samples) s *= padded_mixture.gain_applied;
  out.gain_applied = padded_mixture.gain_applied;
  return out;
}

// `dgmo mix` writes <root>/<id>/mixture.wav; there the directory names the mixture.
std::string mixture_id(const std::filesystem::path& mixture) {
  if (mixture.filename() == "mixture.wav" && mixture.has_parent_path()) {
    const auto parent = std::filesystem::absolute(mixture).parent_path().filename().string();
    if (!parent.empty()) return parent;
  }
  return mixture.stem().string();
}

}  // namespace

int cmd_separate(const RunConfig& cfg_in, std::ostream& out, std::ostream& err) {
  RunConfig cfg = cfg_in;
  try {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();

    const Waveform mixture = load_waveform(cfg.mixture, cfg.sample_rate);
    if (mixture.empty()) throw DomainError("mixture " + cfg.mixture.string() + " has no samples");
    const Waveform padded = pad_and_normalize(mixture, cfg.clip_seconds, 1.0);
    const auto [x_spec, x_phase] = magphase(stft(padded, cfg.stft));

    std::unique_ptr<ReferenceProvider> inner;
    std::filesystem::path refs_file;
    switch (cfg.provider) {
      case ProviderKind::file: {
        refs_file = cfg.refs;
        if (std::filesystem::is_directory(refs_file)) {
          refs_file = reference_path(cfg.refs, mixture_id(cfg.mixture), cfg.query);
        }
        inner = std::make_unique<FileProvider>(refs_file);
        break;
      }
      case ProviderKind::oracle: {
        const Waveform target = load_waveform(cfg.target, cfg.sample_rate);
        inner = std::make_unique<OracleProvider>(align_to_mixture(target, padded, cfg.clip_seconds), cfg.mel, cfg.stft,
                                                 cfg.jitter_db);
        break;
      }
      case ProviderKind::diffusion_exec: {
        ExecProviderConfig exec;
        exec.executable = cfg.refgen_bin;
        exec.query = cfg.query;
        exec.noising_ratio = cfg.refgen_ratio;
        exec.ddim_steps = cfg.refgen_steps;
        exec.mode = cfg.refgen_mode;
        exec.work_dir = cfg.out / "refgen";
        inner = std::make_unique<ExecProvider>(exec);
        break;
      }
    }

    std::filesystem::create_directories(cfg.out);
    ReferenceSet first;
    try {
      first = inner->references(ProviderRequest{istft(x_spec, x_phase, cfg.stft, padded.size()), 1,
                                                cfg.optimizer.n_refs, cfg.optimizer.seed});
    } catch (const ContractError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ProviderError(std::string("reference provider failed on iteration 1: ") + e.what());
    }
    first.validate();
    check_header(first, cfg, x_spec.values.cols());
    // The header is authoritative for the loss space.
    cfg.optimizer.loss_domain = first.domain();
    cfg.mel = first.mel_config;
    const Provenance first_provenance = first.provenance;

    PrefetchedProvider provider(*inner, std::move(first));
    const SeparationResult result = optimize_mask(x_spec, x_phase, provider, cfg.optimizer);

    const Waveform separated = strip_padding(result.waveform, mixture.size());
    save_waveform(cfg.out / "separated.wav", separated, WavEncoding::float32);
    write_mask(result.final_mask, cfg.stft, cfg.sample_rate, cfg.out / "mask.dgm1");
    {
      std::ofstream csv(cfg.out / "loss_trace.csv");
      if (!csv) throw IoError("cannot write " + (cfg.out / "loss_trace.csv").string());
      write_loss_trace_csv(csv, result.loss_trace);
    }

    json per_iteration = json::array();
    for (const auto& trace : result.loss_trace) {
      per_iteration.push_back({{"initial_loss", trace.front()}, {"final_loss", trace.back()}});
    }
    const auto& prov = result.last_references.provenance;
    auto provenance_json = [](const Provenance& p) {
      return json{{"query", p.query},
                  {"backend_id", p.backend_id},
                  {"noising_ratio", p.noising_ratio},
                  {"ddim_steps", p.ddim_steps}};
    };
    json meta = {
        {"dgmo_meta_version", kMetaVersion},
        {"config", to_json(cfg)},
        {"refs_file", refs_file.string()},
        {"mixture_samples", mixture.size()},
        {"padded_samples", padded.size()},
        {"normalization_gain", padded.gain_applied},
        {"spectrogram_shape", {x_spec.values.rows(), x_spec.values.cols()}},
        {"reference_count", result.last_references.count()},
        {"first_provenance", provenance_json(first_provenance)},
        {"last_provenance", provenance_json(prov)},
        {"iterations", per_iteration},
        {"outputs", {{"waveform", "separated.wav"}, {"mask", "mask.dgm1"}, {"loss_trace", "loss_trace.csv"}}},
    };
    {
      std::ofstream os(cfg.out / "meta.json");
      if (!os) throw IoError("cannot write " + (cfg.out / "meta.json").string());
      os << meta.dump(2) << '\n';
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out << "separate: loss " << result.loss_trace.front().front() << " -> " << result.loss_trace.back().back()
        << " over " << cfg.optimizer.iterations << " x " << cfg.optimizer.epochs_per_iteration << " epochs ("
        << secs << " s); wrote " << cfg.out.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "separate: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace dgmo::cli
