#pragma once

#include <optional>
#include <string>
#include <vector>

#include "manifold_ekf/attitude_sim.hpp"
#include "manifold_ekf/errors.hpp"
#include "manifold_ekf/filter.hpp"

namespace manifold_ekf::cli {

/// Invalid configuration; the message names the offending field or line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct VariantSpec {
  /// baseline | true_output | measurement | naive_posterior | iterated
  std::string name;
  int iterations = 0;
  bool geometric_reset = true;

  friend bool operator==(const VariantSpec&, const VariantSpec&) = default;
};

/// Fully resolved run configuration.
struct RunConfig {
  sim::ScenarioConfig scenario;
  std::vector<VariantSpec> variants;
  int runs = 1;
  std::string output_path = "records.csv";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Default variant list used when a config names none.
std::vector<VariantSpec> default_variants();

/// Parses a variant token: a kind name, optionally suffixed with an
/// iteration count ("iterated:5" or "iterated_5"). `iterations` is used for
/// iterated variants without an explicit count.
VariantSpec parse_variant_name(const std::string& token, int iterations);

/// Parses a JSON document. Absent fields take the reference-experiment
/// defaults; unknown keys are rejected. An empty or whitespace-only
/// document yields all defaults.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Serializes a resolved configuration; parse_config_text() inverts it.
std::string config_to_json(const RunConfig& cfg, int indent = 2);

/// Command-line overrides (flags > file > defaults).
struct Overrides {
  std::optional<std::vector<std::string>> variants;
  std::optional<int> iterations;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<std::string> output_path;
};

RunConfig apply_overrides(RunConfig cfg, const Overrides& overrides);

/// Validates the whole configuration, rethrowing as ConfigError.
void validate(const RunConfig& cfg);

/// Builds filter variants; true_output requires `allow_true_output`.
std::vector<UpdateVariant> make_variants(const std::vector<VariantSpec>& specs,
                                         bool allow_true_output);

/// Parses MANIFOLD_EKF_THREADS-style values: empty or "0" means auto (0).
int parse_thread_count(const char* value);

}  // namespace manifold_ekf::cli
