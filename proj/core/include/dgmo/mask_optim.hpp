#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dgmo/matrix.hpp"
#include "dgmo/mel.hpp"
#include "dgmo/reference_set.hpp"
#include "dgmo/stft.hpp"
#include "dgmo/waveform.hpp"

namespace dgmo {

// Ratio mask over the magnitude grid, parameterized by free logits so that
// values() = sigmoid(logits) is always strictly inside (0, 1).
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t bins, std::size_t frames, double logit = 0.0) : logits_(bins, frames, logit) {}
  explicit Mask(RealMatrix logits) : logits_(std::move(logits)) {}

  std::size_t rows() const noexcept { return logits_.rows(); }
  std::size_t cols() const noexcept { return logits_.cols(); }
  const RealMatrix& logits() const noexcept { return logits_; }
  RealMatrix& logits() noexcept { return logits_; }
  RealMatrix values() const;

 private:
  RealMatrix logits_;
};

enum class MaskInit { half, ones };

inline constexpr double kOnesInitLogit = 6.0;

Mask init_mask(std::size_t bins, std::size_t frames, MaskInit init);

// dgmo_loss: (1/n) sum_i mean_cells (mel(x_spec * M) - ref_i)^2.
// Throws ContractError if the filterbank, spectrogram and reference set do not
// share one STFT/mel configuration.
double dgmo_loss(const Mask& m, const MagnitudeSpectrogram& x_spec, const ReferenceSet& refs,
                 const MelFilterbank& fb);

// d(dgmo_loss)/d(logits), same shape as the mask. In the log domain, cells
// clamped at log_floor contribute zero gradient.
RealMatrix dgmo_grad(const Mask& m, const MagnitudeSpectrogram& x_spec, const ReferenceSet& refs,
                     const MelFilterbank& fb);

// Reusable loss/gradient kernel for one (mixture, reference set) pair. Holds
// scratch buffers, so one instance must not be shared between threads.
class MaskObjective {
 public:
  MaskObjective(const MagnitudeSpectrogram& x_spec, const ReferenceSet& refs,
                const MelFilterbank& fb);

  double loss(const Mask& m);
  // Writes the gradient into `grad` (resized as needed) and returns the loss.
  double loss_and_grad(const Mask& m, RealMatrix& grad);

 private:
  void forward(const Mask& m);

  const MagnitudeSpectrogram& x_spec_;
  const ReferenceSet& refs_;
  const MelFilterbank& fb_;
  RealMatrix ref_mean_;
  RealMatrix sig_;     // sigmoid(logits)
  RealMatrix masked_;  // x_spec * sig
  RealMatrix mel_;     // W * masked (linear)
  RealMatrix out_;     // mel in loss domain
  RealMatrix dmel_;
  RealMatrix dmasked_;
};

enum class StepRule { adam, gradient_descent };

struct OptimizerConfig {
  double learning_rate = 0.1;
  int epochs_per_iteration = 300;
  int iterations = 2;
  int n_refs = 4;
  MelDomain loss_domain = MelDomain::log;
  MaskInit mask_init = MaskInit::half;
  std::uint64_t seed = 0;
  StepRule step_rule = StepRule::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

struct ProviderRequest {
  // The mixture on iteration 1, the current separated estimate afterwards.
  // Both at the normalized scale of the spectrogram being masked;
  // estimate.gain_applied holds the normalization gain.
  const Waveform& estimate;
  int iteration = 1;  // 1-based
  int n_refs = 4;
  std::uint64_t seed = 0;
};

// Source of reference sets for optimize_mask. Implementations that cannot
// regenerate may return the same set every iteration.
class ReferenceProvider {
 public:
  virtual ~ReferenceProvider() = default;
  virtual ReferenceSet references(const ProviderRequest& request) = 0;
};

struct SeparationResult {
  Waveform waveform;
  Mask final_mask;
  // loss_trace[r][e]: loss at the start of epoch e of iteration r; the last
  // entry of each iteration is the loss after its final step.
  std::vector<std::vector<double>> loss_trace;
  ReferenceSet last_references;
};

// Gradient-descent mask optimization against provider references, followed by
// phase-preserving reconstruction. Optimizer state (logits and moment
// estimates) carries over between iterations.
SeparationResult optimize_mask(const MagnitudeSpectrogram& x_spec, const PhaseSpectrogram& x_phase,
                               ReferenceProvider& provider, const OptimizerConfig& cfg);

// istft(x_spec * mask, x_phase), divided by the mixture's normalization gain.
Waveform apply_mask_reconstruct(const MagnitudeSpectrogram& x_spec, const PhaseSpectrogram& x_phase,
                                const Mask& m, const StftConfig& cfg, std::size_t out_len);

// Same, for an explicit mask-value matrix (e.g. an ideal ratio mask).
Waveform apply_mask_values_reconstruct(const MagnitudeSpectrogram& x_spec,
                                       const PhaseSpectrogram& x_phase, const RealMatrix& values,
                                       const StftConfig& cfg, std::size_t out_len);

// CSV with header "epoch,iteration,loss"; iteration is 1-based.
void write_loss_trace_csv(std::ostream& os, const std::vector<std::vector<double>>& trace);

}  // namespace dgmo
