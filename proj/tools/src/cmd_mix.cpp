#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "dgmo/errors.hpp"
#include "dgmo/mixkit.hpp"
#include "dgmo_cli/commands.hpp"
#include "exit_codes.hpp"
#include "parallel.hpp"

namespace dgmo::cli {

int cmd_mix(const MixOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<ManifestRow> rows;
  try {
    rows = read_manifest(opts.manifest);
  } catch (const IoError& e) {
    err << "mix: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const Error& e) {
    err << "mix: " << e.what() << '\n';
    return kExitUsage;
  }
  if (rows.empty()) {
    out << "mix: manifest is empty, nothing to do\n";
    return kExitOk;
  }

  std::vector<std::string> failures(rows.size());
  parallel_for(rows.size(), opts.jobs, [&](std::size_t i) {
    try {
      materialize_row(rows[i], opts.out_dir);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  int failed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (failures[i].empty()) {
      out << "ok     " << rows[i].id << '\n';
    } else {
      ++failed;
      out << "FAILED " << rows[i].id << ": " << failures[i] << '\n';
    }
  }
  out << "mix: " << (rows.size() - failed) << "/" << rows.size() << " rows written to " << opts.out_dir.string()
      << '\n';
  if (failed > 0) {
    err << "mix: " << failed << " row(s) failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dgmo::cli
