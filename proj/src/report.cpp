#include "manifold_ekf/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <tuple>

#include "json.hpp"

namespace manifold_ekf::cli {

namespace {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_csv(std::vector<sim::SimRecord> records, std::ostream& out) {
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.variant, a.run_id, a.t) < std::tie(b.variant, b.run_id, b.t);
  });
  out << kCsvHeader << '\n';
  for (const sim::SimRecord& r : records) {
    out << format_real(r.t) << ',' << r.variant << ',' << r.run_id << ','
        << format_real(r.attitude_error) << ',' << format_real(r.energy) << '\n';
  }
}

void emit_csv(std::vector<sim::SimRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing: " + std::strerror(errno));
  write_csv(std::move(records), out);
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

void emit_summary(const std::vector<sim::VariantSummary>& summary, std::ostream& out,
                  bool as_json) {
  if (as_json) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& s : summary) {
      doc.push_back({{"variant", s.variant},
                     {"mean_transient_error_rad", s.mean_transient_error},
                     {"mean_steady_error_rad", s.mean_steady_error},
                     {"mean_energy", s.mean_energy},
                     {"runs", s.runs},
                     {"failures", s.failures}});
    }
    out << nlohmann::json{{"variants", doc}}.dump(2) << '\n';
    return;
  }
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %14s %14s %12s %6s %8s\n", "variant", "transient_err",
                "steady_err", "energy", "runs", "failures");
  out << line;
  for (const auto& s : summary) {
    std::snprintf(line, sizeof line, "%-24s %14.6g %14.6g %12.6g %6d %8d\n", s.variant.c_str(),
                  s.mean_transient_error, s.mean_steady_error, s.mean_energy, s.runs, s.failures);
    out << line;
  }
}

std::vector<sim::SimRecord> collect_records(const sim::BatchResult& batch) {
  std::vector<sim::SimRecord> out;
  for (const auto& per_variant : batch.runs) {
    for (const auto& run : per_variant) {
      out.insert(out.end(), run.records.begin(), run.records.end());
    }
  }
  return out;
}

}  // namespace manifold_ekf::cli
