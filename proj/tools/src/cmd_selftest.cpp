#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "dgmo/mask_optim.hpp"
#include "dgmo/metrics.hpp"
#include "dgmo/refio.hpp"
#include "dgmo_cli/commands.hpp"

namespace dgmo::cli {
namespace {

struct Check {
  std::string name;
  double value = 0.0;  // measured error (or metric deviation)
  double tolerance = 0.0;
  bool pass() const { return std::isfinite(value) && value <= tolerance; }
};

// 8 bins x 8 frames, 4 mel bands.
struct Instance {
  StftConfig stft{14, 14, 4, WindowKind::hann, true};
  MagnitudeSpectrogram x;
  ReferenceSet refs;
  MelFilterbank fb{MelConfig{}, StftConfig{}, kDefaultSampleRate};
};

Instance random_instance(std::mt19937_64& rng, MelDomain domain) {
  Instance inst;
  MelConfig mel;
  mel.n_mels = 4;
  mel.loss_domain = domain;
  const int sr = 8000;
  inst.fb = MelFilterbank(mel, inst.stft, sr);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const std::size_t frames = 8;
  inst.x = {RealMatrix(inst.stft.bins(), frames), inst.stft, SignalInfo{frames, sr, 1.0}};
  for (double& v : inst.x.values.flat()) v = u(rng);
  inst.refs.mel_config = inst.fb.mel_config();
  inst.refs.stft_config = inst.stft;
  inst.refs.sample_rate = sr;
  for (int i = 0; i < 2; ++i) {
    MelSpectrogram m;
    m.domain = domain;
    m.config = inst.refs.mel_config;
    m.values = RealMatrix(4, frames);
    for (double& v : m.values.flat()) v = domain == MelDomain::log ? std::log(u(rng)) : u(rng);
    inst.refs.mels.push_back(std::move(m));
  }
  return inst;
}

double gradient_check(int instances) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const auto domain = k % 2 ? MelDomain::log : MelDomain::linear;
    Instance inst = random_instance(rng, domain);
    Mask mask(inst.x.values.rows(), inst.x.values.cols());
    for (double& v : mask.logits().flat()) v = normal(rng);
    const RealMatrix grad = dgmo_grad(mask, inst.x, inst.refs, inst.fb);
    const double eps = 1e-4;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      Mask plus = mask, minus = mask;
      plus.logits().flat()[i] += eps;
      minus.logits().flat()[i] -= eps;
      const double fd = (dgmo_loss(plus, inst.x, inst.refs, inst.fb) - dgmo_loss(minus, inst.x, inst.refs, inst.fb)) /
                        (2 * eps);
      const double a = grad.flat()[i];
      if (std::max(std::abs(a), std::abs(fd)) > 1e-8) {
        worst = std::max(worst, std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)));
      }
    }
  }
  return worst;
}

double stft_round_trip() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 0.3);
  Waveform w;
  w.samples.resize(2 * kDefaultSampleRate);
  for (double& s : w.samples) s = normal(rng);
  const StftConfig cfg;
  const auto [mag, phase] = magphase(stft(w, cfg));
  const Waveform back = istft(mag, phase, cfg, w.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, std::abs(back.samples[i] - w.samples[i]));
  return worst;
}

double scale_invariance() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> est(4096), ref(4096), scaled(4096);
  for (std::size_t i = 0; i < est.size(); ++i) {
    ref[i] = normal(rng);
    est[i] = ref[i] + 0.3 * normal(rng);
    scaled[i] = 7.25 * est[i];
  }
  return std::abs(si_sdr(scaled, ref) - si_sdr(est, ref));
}

double hand_values() {
  const std::vector<double> ref = {1.0, 0.0};
  const std::vector<double> est = {1.0, 1.0};
  const std::vector<double> ref2 = {1.0, 0.0, 0.0, 0.0};
  const std::vector<double> est2 = {0.5, 0.0, 0.0, 0.0};
  return std::max(std::abs(si_sdr(est, ref) - 0.0), std::abs(sdr(est2, ref2) - 20.0 * std::log10(2.0)));
}

double no_separation_sdri() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> mix(2048), ref(2048);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    ref[i] = normal(rng);
    mix[i] = ref[i] + normal(rng);
  }
  return std::abs(sdri(mix, ref, mix));
}

double dgm1_round_trip() {
  std::mt19937_64 rng(13);
  Instance inst = random_instance(rng, MelDomain::log);
  quantize_f32(inst.refs);
  const auto path = std::filesystem::temp_directory_path() / ("dgmo-selftest-" + std::to_string(::getpid()) + ".dgm1");
  write_refset(inst.refs, path);
  const ReferenceSet back = read_refset(path);
  std::filesystem::remove(path);
  double mismatches = 0.0;
  for (std::size_t i = 0; i < inst.refs.count(); ++i) {
    if (!(back.mels[i].values == inst.refs.mels[i].values)) mismatches += 1.0;
  }
  return mismatches;
}

double mel_linearity() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const StftConfig stft;
  const MelFilterbank fb(MelConfig{}, stft, kDefaultSampleRate);
  MagnitudeSpectrogram a{RealMatrix(stft.bins(), 6), stft, {}}, b = a, c = a;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    a.values.flat()[i] = u(rng);
    b.values.flat()[i] = u(rng);
    c.values.flat()[i] = 2.5 * a.values.flat()[i] + 0.75 * b.values.flat()[i];
  }
  const auto ma = apply_mel(a, fb, MelDomain::linear), mb = apply_mel(b, fb, MelDomain::linear),
             mc = apply_mel(c, fb, MelDomain::linear);
  double worst = 0.0;
  for (std::size_t i = 0; i < mc.values.size(); ++i) {
    const double expect = 2.5 * ma.values.flat()[i] + 0.75 * mb.values.flat()[i];
    worst = std::max(worst, std::abs(mc.values.flat()[i] - expect) / std::max(1.0, std::abs(expect)));
  }
  return worst;
}

}  // namespace

int cmd_selftest(const SelftestOptions& opts, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<Check> checks = {
      {"gradient vs finite differences (rel)", gradient_check(10), opts.inject_failure ? 0.0 : 1e-4},
      {"stft/istft round trip (max abs)", stft_round_trip(), 1e-6},
      {"si_sdr scale invariance (dB)", scale_invariance(), 1e-9},
      {"hand-derived metric values (dB)", hand_values(), 1e-6},
      {"sdri(mix, ref, mix) (dB)", no_separation_sdri(), 0.0},
      {"dgm1 round trip (mismatched mels)", dgm1_round_trip(), 0.5},
      {"mel linearity (rel)", mel_linearity(), 1e-12},
  };

  int failed = 0;
  char line[160];
  out << "check                                    measured        tolerance   result\n";
  for (const auto& c : checks) {
    const bool ok = c.pass();
    failed += ok ? 0 : 1;
    std::snprintf(line, sizeof line, "%-40s %-15.3e %-11.1e %s\n", c.name.c_str(), c.value, c.tolerance,
                  ok ? "PASS" : "FAIL");
    out << line;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out << (checks.size() - failed) << "/" << checks.size() << " checks passed in " << secs << " s\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

}  // namespace dgmo::cli
