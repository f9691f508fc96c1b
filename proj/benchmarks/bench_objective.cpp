#include <benchmark/benchmark.h>

#include <random>

#include "dgmo/mask_optim.hpp"
#include "dgmo/metrics.hpp"
#include "dgmo/refio.hpp"

namespace {

struct Fixture {
  dgmo::MagnitudeSpectrogram mag;
  dgmo::PhaseSpectrogram phase;
  dgmo::ReferenceSet refs;

  explicit Fixture(dgmo::MelDomain domain) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 0.2);
    dgmo::Waveform mix, target;
    mix.samples.resize(163840);
    target.samples.resize(163840);
    for (std::size_t i = 0; i < mix.size(); ++i) {
      target.samples[i] = normal(rng);
      mix.samples[i] = target.samples[i] + normal(rng);
    }
    std::tie(mag, phase) = dgmo::magphase(dgmo::stft(mix, dgmo::StftConfig{}));
    dgmo::MelConfig mel;
    mel.loss_domain = domain;
    refs = dgmo::oracle_refs(target, mel, dgmo::StftConfig{}, 4, 1.0, 0);
  }
};

void BM_LossAndGrad(benchmark::State& state) {
  const auto domain = state.range(0) ? dgmo::MelDomain::log : dgmo::MelDomain::linear;
  const Fixture f(domain);
  const dgmo::MelFilterbank fb(f.refs.mel_config, f.refs.stft_config, f.refs.sample_rate);
  dgmo::MaskObjective objective(f.mag, f.refs, fb);
  const dgmo::Mask mask(f.mag.values.rows(), f.mag.values.cols());
  dgmo::RealMatrix grad;
  for (auto _ : state) benchmark::DoNotOptimize(objective.loss_and_grad(mask, grad));
  state.SetLabel(domain == dgmo::MelDomain::log ? "log" : "linear");
}
BENCHMARK(BM_LossAndGrad)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MelFilterbankBuild(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(dgmo::MelFilterbank(dgmo::MelConfig{}, dgmo::StftConfig{}, 16000));
  }
}
BENCHMARK(BM_MelFilterbankBuild)->Unit(benchmark::kMicrosecond);

void BM_SiSdr(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<double> est(163840), ref(163840);
  for (std::size_t i = 0; i < est.size(); ++i) {
    ref[i] = normal(rng);
    est[i] = ref[i] + 0.1 * normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(dgmo::si_sdr(est, ref));
}
BENCHMARK(BM_SiSdr)->Unit(benchmark::kMicrosecond);

}  // namespace
