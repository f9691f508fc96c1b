#include "dgmo/reference_set.hpp"

#include <string>

#include "dgmo/errors.hpp"

namespace dgmo {

void ReferenceSet::validate() const {
  if (mels.empty()) throw ContractError("reference set is empty");
  if (sample_rate <= 0) throw ContractError("reference set sample_rate must be positive");
  const auto rows = mels.front().values.rows();
  const auto cols = mels.front().values.cols();
  if (rows == 0 || cols == 0) throw ContractError("reference mel has an empty shape");
  if (rows != static_cast<std::size_t>(mel_config.n_mels)) {
    throw ContractError("reference mel has " + std::to_string(rows) + " bands, header says " +
                        std::to_string(mel_config.n_mels));
  }
  for (std::size_t i = 0; i < mels.size(); ++i) {
    const auto& m = mels[i];
    if (m.values.rows() != rows || m.values.cols() != cols) {
      throw ContractError("reference " + std::to_string(i) + " shape differs from reference 0");
    }
    if (m.domain != mel_config.loss_domain) {
      throw ContractError("reference " + std::to_string(i) + " domain differs from the set's domain");
    }
    if (!same_mel_space(m.config, mel_config, sample_rate)) {
      throw ContractError("reference " + std::to_string(i) + " mel config differs from the set's config");
    }
  }
}

}  // namespace dgmo
