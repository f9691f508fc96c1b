#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgmo/metrics.hpp"
#include "dgmo_cli/commands.hpp"
#include "parallel.hpp"

namespace dgmo::cli {
namespace {

namespace fs = std::filesystem;

struct Item {
  std::string id;
  std::string query;
  EvalResult result;
  std::string error;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string read_query(const fs::path& meta) {
  std::ifstream in(meta);
  if (!in) return {};
  try {
    const auto j = nlohmann::json::parse(in);
    return j.value("query", std::string{});
  } catch (const nlohmann::json::exception&) {
    return {};
  }
}

// <est>/<id>/separated.wav (layout written by `separate --out <est>/<id>`), else <est>/<id>.wav.
fs::path find_estimate(const fs::path& est_dir, const std::string& id) {
  const auto nested = est_dir / id / "separated.wav";
  if (fs::exists(nested)) return nested;
  return est_dir / (id + ".wav");
}

}  // namespace

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(opts.truth_dir)) {
    err << "eval: truth directory not found: " << opts.truth_dir.string() << '\n';
    return kExitUsage;
  }
  if (!fs::is_directory(opts.est_dir)) {
    err << "eval: estimate directory not found: " << opts.est_dir.string() << '\n';
    return kExitUsage;
  }

  std::vector<Item> items;
  for (const auto& entry : fs::directory_iterator(opts.truth_dir)) {
    if (entry.is_directory()) items.push_back({entry.path().filename().string(), {}, {}, {}});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.id < b.id; });

  parallel_for(items.size(), opts.jobs, [&](std::size_t i) {
    auto& item = items[i];
    const auto truth = opts.truth_dir / item.id;
    item.query = read_query(truth / "meta.json");
    try {
      const auto est_path = find_estimate(opts.est_dir, item.id);
      if (!fs::exists(est_path)) throw std::runtime_error("no estimate (looked for " + est_path.string() + ")");
      const Waveform target = load_waveform(truth / "target.wav");
      const Waveform mixture = load_waveform(truth / "mixture.wav");
      const Waveform estimate = load_waveform(est_path);
      item.result = evaluate(estimate, target, mixture);
    } catch (const std::exception& e) {
      item.error = e.what();
    }
  });

  std::ostringstream report;
  report << "id,query,si_sdr,sdr,sdri\n";
  double sum_si = 0.0, sum_sdr = 0.0, sum_sdri = 0.0;
  int scored = 0;
  std::vector<const Item*> failed;
  for (const auto& item : items) {
    if (!item.error.empty()) {
      failed.push_back(&item);
      continue;
    }
    ++scored;
    sum_si += item.result.si_sdr;
    sum_sdr += item.result.sdr;
    sum_sdri += item.result.sdri;
    report << csv_field(item.id) << ',' << csv_field(item.query) << ',' << num(item.result.si_sdr) << ','
           << num(item.result.sdr) << ',' << num(item.result.sdri) << '\n';
  }
  if (scored > 0) {
    report << "mean,," << num(sum_si / scored) << ',' << num(sum_sdr / scored) << ',' << num(sum_sdri / scored) << '\n';
  }
  if (!failed.empty()) {
    report << "# errors\n";
    for (const Item* item : failed) report << "# " << item->id << ": " << item->error << '\n';
  }

  if (opts.report) {
    std::ofstream os(*opts.report);
    if (!os) {
      err << "eval: cannot write " << opts.report->string() << '\n';
      return kExitRuntime;
    }
    os << report.str();
    out << "eval: scored " << scored << "/" << items.size() << " items; report in " << opts.report->string() << '\n';
  } else {
    out << report.str();
  }
  if (!failed.empty()) {
    err << "eval: " << failed.size() << " item(s) could not be scored\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dgmo::cli
