#include "fixtures.hpp"

namespace dgmo::testing {

SeparationProblem disjoint_band_problem(double seconds, std::uint64_t seed, const StftConfig& cfg) {
  SeparationProblem p;
  MixtureSpec spec;
  spec.target = synth_source(SourceKind::band_noise, {0.0, 2000.0}, seconds, 16000, seed);
  spec.background = synth_source(SourceKind::band_noise, {4000.0, 8000.0}, seconds, 16000, seed + 1000);
  spec.snr_db = 0.0;
  p.stems = mix_at_snr(spec);
  p.mixture = pad_and_normalize(p.stems.mixture, seconds, 1.0);
  p.target_normalized = p.stems.target;
  for (double& s : p.target_normalized.samples) s *= p.mixture.gain_applied;
  p.target_normalized.gain_applied = p.mixture.gain_applied;
  std::tie(p.mag, p.phase) = magphase(stft(p.mixture, cfg));
  return p;
}

}  // namespace dgmo::testing
