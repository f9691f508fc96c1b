#pragma once

#include <exception>

#include "dgmo/errors.hpp"
#include "dgmo_cli/commands.hpp"

namespace dgmo::cli {

// Configuration and contract problems are the user's to fix (exit 2);
// everything else is a runtime failure (exit 1).
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ContractError*>(&e)) return kExitUsage;
  return kExitRuntime;
}

}  // namespace dgmo::cli
