#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dgmo/mel.hpp"
#include "dgmo/stft.hpp"

namespace dgmo {

enum class RefOrigin { diffusion, oracle, file };

struct Provenance {
  std::string query;
  std::string backend_id;
  double noising_ratio = 0.0;
  int ddim_steps = 0;
  RefOrigin created_by = RefOrigin::file;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// n reference mel spectrograms sharing one mel/STFT configuration. The
// mel_config here is authoritative: the loss filterbank is built from it.
struct ReferenceSet {
  std::vector<MelSpectrogram> mels;
  MelConfig mel_config;
  StftConfig stft_config;
  int sample_rate = kDefaultSampleRate;
  Provenance provenance;

  std::size_t count() const noexcept { return mels.size(); }
  std::size_t n_mels() const noexcept { return mels.empty() ? 0 : mels.front().values.rows(); }
  std::size_t frames() const noexcept { return mels.empty() ? 0 : mels.front().values.cols(); }
  MelDomain domain() const noexcept { return mel_config.loss_domain; }

  // Throws ContractError unless n >= 1 and every mel matches shape, domain
  // and config of the set.
  void validate() const;
};

}  // namespace dgmo
