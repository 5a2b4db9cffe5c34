// Attitude-from-two-directions simulator for the manifold error-state EKF.
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error,
//             3 at least one filter run diverged (output is still written).

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "manifold_ekf/attitude_sim.hpp"
#include "manifold_ekf/report.hpp"
#include "manifold_ekf/run_config.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitDiverged = 3;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace manifold_ekf;

  CLI::App app{"Monte Carlo simulator for the geometric error-state EKF on SO(3)"};
  std::string config_path;
  std::string variants;
  int iters = -1;
  int runs = -1;
  std::uint64_t seed = 0;
  double duration = -1.0;
  std::string out_path;
  bool json = false;
  bool allow_true_output = false;
  bool print_config = false;

  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--variant", variants,
                 "Comma-separated variants: baseline, true_output, measurement, "
                 "naive_posterior, iterated[:N]");
  app.add_option("--iters", iters, "Iteration count for iterated variants");
  app.add_option("--runs", runs, "Number of paired Monte Carlo runs");
  auto* seed_opt = app.add_option("--seed", seed, "Base RNG seed");
  app.add_option("--duration", duration, "Simulated duration in seconds");
  app.add_option("--out", out_path, "CSV output path");
  app.add_flag("--json", json, "Print the summary as JSON");
  app.add_flag("--allow-true-output", allow_true_output,
               "Enable the diagnostics-only true_output variant");
  app.add_flag("--print-config", print_config, "Print the resolved configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  cli::RunConfig cfg;
  std::vector<UpdateVariant> filter_variants;
  int threads = 0;
  try {
    cfg = config_path.empty() ? cli::parse_config_text("") : cli::parse_config_file(config_path);
    cli::Overrides o;
    if (!variants.empty()) o.variants = split_commas(variants);
    if (app.count("--iters")) o.iterations = iters;
    if (app.count("--runs")) o.runs = runs;
    if (seed_opt->count()) o.seed = seed;
    if (app.count("--duration")) {
      if (!(duration >= 0.0)) throw cli::ConfigError("--duration: must be non-negative");
      o.duration = duration;
    }
    if (!out_path.empty()) o.output_path = out_path;
    cfg = cli::apply_overrides(cfg, o);
    filter_variants = cli::make_variants(cfg.variants, allow_true_output);
    threads = cli::parse_thread_count(std::getenv("MANIFOLD_EKF_THREADS"));
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (print_config) {
    std::cout << cli::config_to_json(cfg) << '\n';
    return 0;
  }

  const sim::BatchResult batch =
      sim::monte_carlo(cfg.scenario, filter_variants, cfg.runs, threads);

  try {
    cli::emit_csv(cli::collect_records(batch), cfg.output_path);
  } catch (const cli::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }

  const auto summary = sim::summarize(batch, cfg.scenario.duration);
  cli::emit_summary(summary, std::cout, json);

  int failures = 0;
  for (const auto& per_variant : batch.runs) {
    for (const auto& run : per_variant) {
      if (run.failure) {
        ++failures;
        std::cerr << "run " << run.run_id << " (" << run.variant << ") diverged: " << *run.failure
                  << '\n';
      }
    }
  }
  return failures > 0 ? kExitDiverged : 0;
}
