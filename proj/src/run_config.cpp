#include "manifold_ekf/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "manifold_ekf/linalg.hpp"

namespace manifold_ekf::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kVariantKinds = {"baseline", "true_output", "measurement",
                                             "naive_posterior", "iterated"};

bool default_reset_for(const std::string& kind) { return kind != "baseline"; }

int normalized_iterations(const std::string& kind, int iterations) {
  if (kind == "iterated") return iterations;
  return kind == "naive_posterior" ? 1 : 0;
}

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError(field + ": " + why);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

std::string join_path(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

double read_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

Eigen::Vector3d read_vec3(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) fail(field, "expected an array of 3 numbers");
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) out[i] = read_number(v[static_cast<std::size_t>(i)], field);
  return out;
}

// Accepts [a, b, c] as a diagonal or a 3x3 array of rows.
Eigen::Matrix3d read_mat3(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) fail(field, "expected 3 diagonal entries or a 3x3 matrix");
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  if (v[0].is_number()) {
    for (std::size_t i = 0; i < 3; ++i) {
      const double d = read_number(v[i], field);
      if (d < 0.0) fail(field, "diagonal entry " + std::to_string(i) + " is negative");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d;
    }
    return out;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_array() || v[i].size() != 3) fail(field, "expected a 3x3 matrix");
    for (std::size_t j = 0; j < 3; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = read_number(v[i][j], field);
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (out(i, i) < 0.0) fail(field, "diagonal entry " + std::to_string(i) + " is negative");
  }
  return out;
}

json mat3_to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

sim::OmegaProfile read_omega(const json& v, const std::string& field) {
  if (!v.is_object()) fail(field, "expected an object");
  reject_unknown(v, field, {"kind", "amplitude", "value"});
  const std::string kind = v.value("kind", std::string("oscillatory"));
  if (kind == "oscillatory") {
    if (v.contains("value")) fail(field + ".value", "only valid for kind \"constant\"");
    return sim::OmegaProfile::oscillatory(
        v.contains("amplitude") ? read_number(v["amplitude"], field + ".amplitude") : 0.1);
  }
  if (kind == "constant") {
    if (v.contains("amplitude")) fail(field + ".amplitude", "only valid for kind \"oscillatory\"");
    if (!v.contains("value")) fail(field + ".value", "required for kind \"constant\"");
    return sim::OmegaProfile::constant_rate(read_vec3(v["value"], field + ".value"));
  }
  fail(field + ".kind", "expected \"oscillatory\" or \"constant\", got \"" + kind + "\"");
}

sim::ScenarioConfig read_scenario(const json& v) {
  const std::string where = "scenario";
  if (!v.is_object()) fail(where, "expected an object");
  reject_unknown(v, where,
                 {"dt", "duration", "omega", "gyro_var", "meas_cov_ambient", "d1", "d2", "init_cov",
                  "process_floor", "seed"});
  sim::ScenarioConfig s;
  if (v.contains("dt")) s.dt = read_number(v["dt"], join_path(where, "dt"));
  if (v.contains("duration")) s.duration = read_number(v["duration"], join_path(where, "duration"));
  if (v.contains("omega")) s.omega = read_omega(v["omega"], join_path(where, "omega"));
  if (v.contains("gyro_var")) s.gyro_var = read_number(v["gyro_var"], join_path(where, "gyro_var"));
  if (v.contains("meas_cov_ambient")) {
    s.meas_cov_ambient = read_mat3(v["meas_cov_ambient"], join_path(where, "meas_cov_ambient"));
  }
  if (v.contains("d1")) s.d1 = read_vec3(v["d1"], join_path(where, "d1"));
  if (v.contains("d2")) s.d2 = read_vec3(v["d2"], join_path(where, "d2"));
  if (v.contains("init_cov")) s.init_cov = read_mat3(v["init_cov"], join_path(where, "init_cov"));
  if (v.contains("process_floor")) {
    s.process_floor = read_number(v["process_floor"], join_path(where, "process_floor"));
  }
  if (v.contains("seed")) {
    if (!v["seed"].is_number_unsigned()) fail("scenario.seed", "expected a non-negative integer");
    s.seed = v["seed"].get<std::uint64_t>();
  }
  return s;
}

VariantSpec read_variant(const json& v, const std::string& where) {
  if (v.is_string()) return parse_variant_name(v.get<std::string>(), 0);
  if (!v.is_object()) fail(where, "expected a name or an object");
  reject_unknown(v, where, {"name", "iterations", "geometric_reset"});
  if (!v.contains("name") || !v["name"].is_string()) fail(where + ".name", "required string");
  int iterations = 0;
  if (v.contains("iterations")) {
    if (!v["iterations"].is_number_integer()) fail(where + ".iterations", "expected an integer");
    iterations = v["iterations"].get<int>();
    if (iterations < 0) fail(where + ".iterations", "must be >= 0");
  }
  VariantSpec spec;
  try {
    spec = parse_variant_name(v["name"].get<std::string>(), iterations);
  } catch (const ConfigError& e) {
    fail(where + ".name", e.what());
  }
  if (v.contains("geometric_reset")) {
    if (!v["geometric_reset"].is_boolean()) fail(where + ".geometric_reset", "expected a boolean");
    spec.geometric_reset = v["geometric_reset"].get<bool>();
  }
  return spec;
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

}  // namespace

std::vector<VariantSpec> default_variants() {
  return {{"baseline", 0, false}, {"measurement", 0, true}, {"naive_posterior", 1, true}};
}

VariantSpec parse_variant_name(const std::string& token, int iterations) {
  std::string kind = token;
  std::optional<int> count;
  for (const std::string prefix : {"iterated:", "iterated_"}) {
    if (token.rfind(prefix, 0) == 0) {
      const std::string digits = token.substr(prefix.size());
      int n = -1;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
      if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || n < 0) {
        throw ConfigError("variant \"" + token + "\": invalid iteration count");
      }
      kind = "iterated";
      count = n;
    }
  }
  if (!kVariantKinds.count(kind)) {
    throw ConfigError("unknown variant \"" + token +
                      "\" (expected baseline, true_output, measurement, naive_posterior, "
                      "iterated[:N])");
  }
  if (iterations < 0) throw ConfigError("iteration count must be >= 0");
  const int iters = normalized_iterations(kind, count.value_or(iterations));
  return VariantSpec{kind, iters, default_reset_for(kind)};
}

RunConfig parse_config_text(const std::string& text) {
  const bool blank =
      std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
  json doc;
  if (blank) {
    doc = json::object();
  } else {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      std::ostringstream os;
      os << "line " << line_of_offset(text, e.byte) << ": " << e.what();
      throw ConfigError(os.str());
    }
  }
  if (!doc.is_object()) throw ConfigError("<root>: expected a JSON object");
  reject_unknown(doc, "", {"scenario", "variants", "runs", "output_path"});

  RunConfig cfg;
  if (doc.contains("scenario")) cfg.scenario = read_scenario(doc["scenario"]);
  if (doc.contains("variants")) {
    const json& vs = doc["variants"];
    if (!vs.is_array()) fail("variants", "expected an array");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      cfg.variants.push_back(read_variant(vs[i], "variants[" + std::to_string(i) + "]"));
    }
  } else {
    cfg.variants = default_variants();
  }
  if (doc.contains("runs")) {
    if (!doc["runs"].is_number_integer()) fail("runs", "expected an integer");
    cfg.runs = doc["runs"].get<int>();
  }
  if (doc.contains("output_path")) {
    if (!doc["output_path"].is_string()) fail("output_path", "expected a string");
    cfg.output_path = doc["output_path"].get<std::string>();
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string config_to_json(const RunConfig& cfg, int indent) {
  const sim::ScenarioConfig& s = cfg.scenario;
  json omega;
  if (s.omega.kind == sim::OmegaProfile::Kind::kOscillatory) {
    omega = {{"kind", "oscillatory"}, {"amplitude", s.omega.amplitude}};
  } else {
    omega = {{"kind", "constant"}, {"value", vec3_to_json(s.omega.constant)}};
  }
  json variants = json::array();
  for (const VariantSpec& v : cfg.variants) {
    variants.push_back(
        {{"name", v.name}, {"iterations", v.iterations}, {"geometric_reset", v.geometric_reset}});
  }
  const json doc = {
      {"scenario",
       {{"dt", s.dt},
        {"duration", s.duration},
        {"omega", omega},
        {"gyro_var", s.gyro_var},
        {"meas_cov_ambient", mat3_to_json(s.meas_cov_ambient)},
        {"d1", vec3_to_json(s.d1)},
        {"d2", vec3_to_json(s.d2)},
        {"init_cov", mat3_to_json(s.init_cov)},
        {"process_floor", s.process_floor},
        {"seed", s.seed}}},
      {"variants", variants},
      {"runs", cfg.runs},
      {"output_path", cfg.output_path}};
  return doc.dump(indent);
}

RunConfig apply_overrides(RunConfig cfg, const Overrides& o) {
  if (o.iterations && *o.iterations < 0) fail("--iters", "must be >= 0");
  if (o.variants) {
    cfg.variants.clear();
    for (const std::string& token : *o.variants) {
      cfg.variants.push_back(parse_variant_name(token, o.iterations.value_or(0)));
    }
  } else if (o.iterations) {
    for (VariantSpec& v : cfg.variants) {
      if (v.name == "iterated") v.iterations = *o.iterations;
    }
  }
  if (o.runs) cfg.runs = *o.runs;
  if (o.seed) cfg.scenario.seed = *o.seed;
  if (o.duration) cfg.scenario.duration = *o.duration;
  if (o.output_path) cfg.output_path = *o.output_path;
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  try {
    cfg.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario.") + e.what());
  }
  if (cfg.runs < 1) fail("runs", "must be >= 1");
  if (cfg.variants.empty()) fail("variants", "at least one variant is required");
  for (std::size_t i = 0; i < cfg.variants.size(); ++i) {
    const VariantSpec& v = cfg.variants[i];
    const std::string where = "variants[" + std::to_string(i) + "]";
    if (!kVariantKinds.count(v.name)) fail(where + ".name", "unknown variant \"" + v.name + "\"");
    if (v.iterations < 0) fail(where + ".iterations", "must be >= 0");
  }
  if (cfg.output_path.empty()) fail("output_path", "must not be empty");
}

std::vector<UpdateVariant> make_variants(const std::vector<VariantSpec>& specs,
                                         bool allow_true_output) {
  std::vector<UpdateVariant> out;
  for (const VariantSpec& s : specs) {
    UpdateVariant v = UpdateVariant::baseline();
    if (s.name == "baseline") {
      v = UpdateVariant::baseline();
    } else if (s.name == "true_output") {
      if (!allow_true_output) {
        throw ConfigError(
            "variant true_output reads the simulated ground truth; pass --allow-true-output");
      }
      v = UpdateVariant::true_output(DiagnosticsOptIn{});
    } else if (s.name == "measurement") {
      v = UpdateVariant::measurement();
    } else if (s.name == "naive_posterior") {
      v = UpdateVariant::naive_posterior();
    } else if (s.name == "iterated") {
      v = UpdateVariant::iterated(s.iterations);
    } else {
      throw ConfigError("unknown variant \"" + s.name + "\"");
    }
    out.push_back(v.with_geometric_reset(s.geometric_reset));
  }
  return out;
}

int parse_thread_count(const char* value) {
  if (value == nullptr || *value == '\0') return 0;
  const std::string s(value);
  int n = -1;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || n < 0) {
    throw ConfigError("MANIFOLD_EKF_THREADS: expected a non-negative integer, got \"" + s + "\"");
  }
  return n;
}

}  // namespace manifold_ekf::cli
