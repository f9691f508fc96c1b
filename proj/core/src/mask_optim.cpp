#include "dgmo/mask_optim.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "dgmo/errors.hpp"

namespace dgmo {
namespace {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_objective_inputs(const MagnitudeSpectrogram& x_spec, const ReferenceSet& refs,
                            const MelFilterbank& fb) {
  refs.validate();
  if (!(refs.stft_config == x_spec.config)) {
    throw ContractError("reference STFT config differs from the mixture's STFT config");
  }
  if (!(fb.stft_config() == refs.stft_config)) {
    throw ContractError("filterbank STFT config differs from the reference header");
  }
  if (refs.sample_rate != x_spec.signal.sample_rate || fb.sample_rate() != refs.sample_rate) {
    throw ContractError("sample rate mismatch: mixture " + std::to_string(x_spec.signal.sample_rate) +
                        ", references " + std::to_string(refs.sample_rate) + ", filterbank " +
                        std::to_string(fb.sample_rate()));
  }
  if (!same_filter_geometry(fb.mel_config(), refs.mel_config, refs.sample_rate)) {
    throw ContractError("filterbank mel config differs from the reference header");
  }
  if (x_spec.values.rows() != fb.n_bins()) {
    throw ContractError("mixture spectrogram bins differ from the filterbank width");
  }
  if (refs.frames() != x_spec.values.cols()) {
    throw ContractError("references have " + std::to_string(refs.frames()) + " frames, mixture has " +
                        std::to_string(x_spec.values.cols()));
  }
}

}  // namespace

RealMatrix Mask::values() const {
  RealMatrix out(logits_.rows(), logits_.cols());
  const auto src = logits_.flat();
  auto dst = out.flat();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sigmoid(src[i]);
  return out;
}

Mask init_mask(std::size_t bins, std::size_t frames, MaskInit init) {
  if (bins == 0 || frames == 0) throw ContractError("init_mask: shape must be positive");
  return Mask(bins, frames, init == MaskInit::half ? 0.0 : kOnesInitLogit);
}

MaskObjective::MaskObjective(const MagnitudeSpectrogram& x_spec, const ReferenceSet& refs,
                             const MelFilterbank& fb)
    : x_spec_(x_spec), refs_(refs), fb_(fb) {
  check_objective_inputs(x_spec, refs, fb);
  ref_mean_ = RealMatrix(refs.n_mels(), refs.frames());
  auto mean = ref_mean_.flat();
  for (const auto& r : refs.mels) {
    const auto v = r.values.flat();
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += v[i];
  }
  const double inv_n = 1.0 / static_cast<double>(refs.count());
  for (double& v : mean) v *= inv_n;
}

void MaskObjective::forward(const Mask& m) {
  if (!m.logits().same_shape(x_spec_.values)) {
    throw ContractError("mask shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        " differs from spectrogram shape " + std::to_string(x_spec_.values.rows()) + "x" +
                        std::to_string(x_spec_.values.cols()));
  }
  if (!sig_.same_shape(m.logits())) {
    sig_ = RealMatrix(m.rows(), m.cols());
    masked_ = RealMatrix(m.rows(), m.cols());
  }
  const auto logits = m.logits().flat();
  const auto x = x_spec_.values.flat();
  auto sig = sig_.flat();
  auto masked = masked_.flat();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    sig[i] = sigmoid(logits[i]);
    masked[i] = x[i] * sig[i];
  }
  fb_.apply(masked_, mel_);
  out_ = mel_;
  if (refs_.domain() == MelDomain::log) to_log_domain(out_, refs_.mel_config.log_floor);
}

double MaskObjective::loss(const Mask& m) {
  forward(m);
  const auto out = out_.flat();
  double total = 0.0;
  for (const auto& r : refs_.mels) {
    const auto ref = r.values.flat();
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = out[i] - ref[i];
      sum += d * d;
    }
    total += sum / static_cast<double>(out.size());
  }
  return total / static_cast<double>(refs_.count());
}

double MaskObjective::loss_and_grad(const Mask& m, RealMatrix& grad) {
  const double value = loss(m);

  // d/dout of (1/n) sum_i mean (out - ref_i)^2 = 2 (out - mean_i ref_i) / cells.
  const auto out = out_.flat();
  const auto mean = ref_mean_.flat();
  const auto mel = mel_.flat();
  if (!dmel_.same_shape(out_)) dmel_ = RealMatrix(out_.rows(), out_.cols());
  auto dmel = dmel_.flat();
  const double scale = 2.0 / static_cast<double>(out.size());
  const bool log_domain = refs_.domain() == MelDomain::log;
  const double floor = refs_.mel_config.log_floor;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double g = scale * (out[i] - mean[i]);
    if (log_domain) g = mel[i] > floor ? g / mel[i] : 0.0;
    dmel[i] = g;
  }

  fb_.apply_transpose(dmel_, dmasked_);
  if (!grad.same_shape(m.logits())) grad = RealMatrix(m.rows(), m.cols());
  const auto dmasked = dmasked_.flat();
  const auto x = x_spec_.values.flat();
  const auto sig = sig_.flat();
  auto g = grad.flat();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = dmasked[i] * x[i] * sig[i] * (1.0 - sig[i]);
  return value;
}

double dgmo_loss(const Mask& m, const MagnitudeSpectrogram& x_spec, const ReferenceSet& refs,
                 const MelFilterbank& fb) {
  MaskObjective objective(x_spec, refs, fb);
  return objective.loss(m);
}

RealMatrix dgmo_grad(const Mask& m, const MagnitudeSpectrogram& x_spec, const ReferenceSet& refs,
                     const MelFilterbank& fb) {
  MaskObjective objective(x_spec, refs, fb);
  RealMatrix grad;
  objective.loss_and_grad(m, grad);
  return grad;
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (epochs_per_iteration < 1) throw ConfigError("epochs_per_iteration must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (n_refs < 1) throw ConfigError("n_refs must be >= 1");
  if (step_rule == StepRule::adam) {
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
      throw ConfigError("adam betas must be in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  }
}

namespace {

// Update rule on the logits. Adam's epsilon is taken relative to the RMS of
// the first gradient, which makes the whole trajectory invariant to a global
// rescaling of the loss.
class Stepper {
 public:
  explicit Stepper(const OptimizerConfig& cfg) : cfg_(cfg) {}

  void step(RealMatrix& logits, const RealMatrix& grad) {
    auto theta = logits.flat();
    const auto g = grad.flat();
    if (cfg_.step_rule == StepRule::gradient_descent) {
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg_.learning_rate * g[i];
      return;
    }
    if (first_.empty()) {
      first_.assign(theta.size(), 0.0);
      second_.assign(theta.size(), 0.0);
      double sq = 0.0;
      for (double v : g) sq += v * v;
      const double rms = std::sqrt(sq / static_cast<double>(g.size()));
      epsilon_ = cfg_.adam_epsilon * (rms > 0.0 ? rms : 1.0);
    }
    ++t_;
    const double b1 = cfg_.adam_beta1;
    const double b2 = cfg_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      first_[i] = b1 * first_[i] + (1.0 - b1) * g[i];
      second_[i] = b2 * second_[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = first_[i] / c1;
      const double v_hat = second_[i] / c2;
      theta[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }

 private:
  const OptimizerConfig& cfg_;
  std::vector<double> first_;
  std::vector<double> second_;
  double epsilon_ = 0.0;
  int t_ = 0;
};

bool all_finite(const RealMatrix& m) {
  for (double v : m.flat()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

SeparationResult optimize_mask(const MagnitudeSpectrogram& x_spec, const PhaseSpectrogram& x_phase,
                               ReferenceProvider& provider, const OptimizerConfig& cfg) {
  cfg.validate();
  if (!x_spec.values.same_shape(x_phase.values)) throw ContractError("optimize_mask: magnitude/phase shape mismatch");
  const std::size_t out_len = x_spec.signal.length;

  SeparationResult result;
  Mask mask = init_mask(x_spec.values.rows(), x_spec.values.cols(), cfg.mask_init);
  Stepper stepper(cfg);
  RealMatrix grad;
  std::optional<MelFilterbank> fb;

  // Providers see signals at the normalized scale; iteration 1 gets the mixture.
  Waveform estimate = istft(x_spec, x_phase, x_spec.config, out_len);

  for (int iteration = 1; iteration <= cfg.iterations; ++iteration) {
    ReferenceSet refs;
    try {
      refs = provider.references(ProviderRequest{estimate, iteration, cfg.n_refs, cfg.seed});
    } catch (const ContractError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ProviderError("reference provider failed on iteration " + std::to_string(iteration) + ": " + e.what());
    }
    refs.validate();
    if (refs.domain() != cfg.loss_domain) {
      throw ContractError(std::string("reference domain is ") + (refs.domain() == MelDomain::log ? "log" : "linear") +
                          " but the optimizer is configured for " +
                          (cfg.loss_domain == MelDomain::log ? "log" : "linear"));
    }
    if (!fb || !same_filter_geometry(fb->mel_config(), refs.mel_config, refs.sample_rate) ||
        !(fb->stft_config() == refs.stft_config) || fb->sample_rate() != refs.sample_rate) {
      fb.emplace(refs.mel_config, refs.stft_config, refs.sample_rate);
    }

    MaskObjective objective(x_spec, refs, *fb);
    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(cfg.epochs_per_iteration) + 1);
    for (int epoch = 0; epoch < cfg.epochs_per_iteration; ++epoch) {
      const double value = objective.loss_and_grad(mask, grad);
      if (!std::isfinite(value) || !all_finite(grad)) {
        throw OptimizationError("non-finite loss or gradient at iteration " + std::to_string(iteration) +
                                ", epoch " + std::to_string(epoch));
      }
      trace.push_back(value);
      stepper.step(mask.logits(), grad);
    }
    const double final_value = objective.loss(mask);
    if (!std::isfinite(final_value) || !all_finite(mask.logits())) {
      throw OptimizationError("non-finite loss after the last step of iteration " + std::to_string(iteration) +
                              " (epoch " + std::to_string(cfg.epochs_per_iteration) + ")");
    }
    trace.push_back(final_value);
    result.loss_trace.push_back(std::move(trace));

    if (iteration < cfg.iterations) {
      MagnitudeSpectrogram masked{x_spec.values, x_spec.config, x_spec.signal};
      const RealMatrix values = mask.values();
      for (std::size_t i = 0; i < values.size(); ++i) masked.values.flat()[i] *= values.flat()[i];
      estimate = istft(masked, x_phase, x_spec.config, out_len);
    }
    result.last_references = std::move(refs);
  }

  result.waveform = apply_mask_reconstruct(x_spec, x_phase, mask, x_spec.config, out_len);
  result.final_mask = std::move(mask);
  return result;
}

Waveform apply_mask_values_reconstruct(const MagnitudeSpectrogram& x_spec, const PhaseSpectrogram& x_phase,
                                       const RealMatrix& values, const StftConfig& cfg, std::size_t out_len) {
  if (!values.same_shape(x_spec.values) || !x_phase.values.same_shape(x_spec.values)) {
    throw ContractError("reconstruct: mask, magnitude and phase shapes must match");
  }
  MagnitudeSpectrogram masked{x_spec.values, x_spec.config, x_spec.signal};
  auto dst = masked.values.flat();
  const auto v = values.flat();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= v[i];
  return undo_gain(istft(masked, x_phase, cfg, out_len));
}

Waveform apply_mask_reconstruct(const MagnitudeSpectrogram& x_spec, const PhaseSpectrogram& x_phase,
                                const Mask& m, const StftConfig& cfg, std::size_t out_len) {
  return apply_mask_values_reconstruct(x_spec, x_phase, m.values(), cfg, out_len);
}

void write_loss_trace_csv(std::ostream& os, const std::vector<std::vector<double>>& trace) {
  os << "epoch,iteration,loss\n";
  char buf[64];
  for (std::size_t r = 0; r < trace.size(); ++r) {
    for (std::size_t e = 0; e < trace[r].size(); ++e) {
      std::snprintf(buf, sizeof buf, "%.17g", trace[r][e]);
      os << e << ',' << (r + 1) << ',' << buf << '\n';
    }
  }
}

}  // namespace dgmo
