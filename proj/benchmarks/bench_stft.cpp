#include <benchmark/benchmark.h>

#include <random>

#include "dgmo/stft.hpp"

namespace {

dgmo::Waveform noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 0.3);
  dgmo::Waveform w;
  w.samples.resize(n);
  for (double& s : w.samples) s = normal(rng);
  return w;
}

void BM_Stft(benchmark::State& state) {
  const auto w = noise(static_cast<std::size_t>(state.range(0)));
  const dgmo::StftConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(dgmo::stft(w, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Stft)->Arg(16000)->Arg(163840)->Unit(benchmark::kMillisecond);

void BM_Istft(benchmark::State& state) {
  const auto w = noise(static_cast<std::size_t>(state.range(0)));
  const dgmo::StftConfig cfg;
  const auto [mag, phase] = dgmo::magphase(dgmo::stft(w, cfg));
  for (auto _ : state) benchmark::DoNotOptimize(dgmo::istft(mag, phase, cfg, w.size()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Istft)->Arg(16000)->Arg(163840)->Unit(benchmark::kMillisecond);

}  // namespace
