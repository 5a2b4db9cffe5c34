#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "manifold_ekf/attitude_sim.hpp"
#include "manifold_ekf/errors.hpp"

namespace manifold_ekf::cli {

class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kCsvHeader = "t,variant,run_id,attitude_error_rad,energy";

/// Writes the header and one row per record, sorted by (variant, run_id, t)
/// with variant compared lexicographically. Reals use 17 significant digits.
void write_csv(std::vector<sim::SimRecord> records, std::ostream& out);

/// write_csv to a file; throws IoError naming the path.
void emit_csv(std::vector<sim::SimRecord> records, const std::string& path);

/// Human-readable table, or a JSON document when `as_json` is set.
void emit_summary(const std::vector<sim::VariantSummary>& summary, std::ostream& out,
                  bool as_json);

/// Flattens every run of a batch into one record stream.
std::vector<sim::SimRecord> collect_records(const sim::BatchResult& batch);

}  // namespace manifold_ekf::cli
