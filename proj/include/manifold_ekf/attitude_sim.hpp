#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "manifold_ekf/filter.hpp"
#include "manifold_ekf/so3.hpp"
#include "manifold_ekf/sphere.hpp"

namespace manifold_ekf::sim {

/// Body-frame angular velocity as a function of time.
struct OmegaProfile {
  enum class Kind { kOscillatory, kConstant };

  Kind kind = Kind::kOscillatory;
  /// ω(t) = a·(cos t, sin t, sin t) for kOscillatory.
  double amplitude = 0.1;
  Eigen::Vector3d constant = Eigen::Vector3d::Zero();

  static OmegaProfile oscillatory(double amplitude);
  static OmegaProfile constant_rate(const Eigen::Vector3d& omega);

  Eigen::Vector3d operator()(double t) const;

  friend bool operator==(const OmegaProfile&, const OmegaProfile&) = default;
};

/// Attitude-from-two-directions scenario. Defaults reproduce the reference
/// experiment: δt = 0.02 s, gyro variance 0.02 (rad/s)², direction noise
/// diag(0.01, 0.03, 0.05) rad², d₁ = (0,1,0), d₂ = (1,0,1)/√2, initial
/// covariance 1.5² I.
struct ScenarioConfig {
  double dt = 0.02;
  double duration = 30.0;
  OmegaProfile omega;
  double gyro_var = 0.02;
  Eigen::Matrix3d meas_cov_ambient = Eigen::Vector3d(0.01, 0.03, 0.05).asDiagonal();
  Eigen::Vector3d d1 = Eigen::Vector3d(0.0, 1.0, 0.0);
  Eigen::Vector3d d2 = Eigen::Vector3d(1.0, 0.0, 1.0) / std::sqrt(2.0);
  Eigen::Matrix3d init_cov = 2.25 * Eigen::Matrix3d::Identity();
  /// R^P, a numerical floor on the process noise.
  double process_floor = 1e-12;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Number of filter steps, round(duration / dt).
  std::size_t steps() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct TruthSample {
  double t;
  Rotation attitude;
  Eigen::Vector3d omega;
};

/// Sensor readings for the step k → k+1: the gyro sample taken at t_k and
/// the two directions observed at t_{k+1}.
struct SensorSample {
  Eigen::Vector3d gyro;
  UnitVector y1;
  UnitVector y2;
};

/// R₀ = I, R_{k+1} = R_k exp(ω(t_k) δt), re-orthonormalized every step.
/// Returns steps() + 1 samples.
std::vector<TruthSample> simulate_truth(const ScenarioConfig& cfg);

/// Noisy gyro and direction measurements along `truth` (one per step).
/// Directions are perturbed by an ambient ν ~ N(0, meas_cov_ambient)
/// projected to the tangent plane: y = exp_{Rᵀd}(Bᵀν).
std::vector<SensorSample> simulate_sensors(const std::vector<TruthSample>& truth,
                                           const ScenarioConfig& cfg, std::mt19937_64& rng);

enum class StreamPurpose : std::uint64_t { kSensors = 1, kInitialEstimate = 2 };

/// Private RNG stream for one run: mt19937_64 seeded with
/// splitmix64(seed ⊕ splitmix64(4·run_id + purpose)).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t run_id, StreamPurpose purpose);

/// Everything random about one run, shared by all variants (paired noise).
struct RunData {
  std::vector<TruthSample> truth;
  std::vector<SensorSample> sensors;
  Rotation initial_estimate;
};

RunData generate_run_data(const ScenarioConfig& cfg, std::uint64_t run_id);

/// Gyro-driven SO(3) kinematics with R^I = gyro_var·I and R^P = process_floor·I.
SystemModel attitude_system_model(const ScenarioConfig& cfg);

/// Output (Rᵀd₁, Rᵀd₂) ∈ S²×S². Q at an output point is block-diagonal with
/// Bᵀ Σ_amb B per direction, B the sphere basis at that point.
MeasurementModel attitude_measurement_model(const ScenarioConfig& cfg);

struct SimRecord {
  double t;
  std::string variant;
  std::uint64_t run_id;
  /// |log(R̂ᵀ R)| in [0, π].
  double attitude_error;
  double energy;
};

struct RunResult {
  std::string variant;
  std::uint64_t run_id = 0;
  std::vector<SimRecord> records;
  /// Set when the run aborted (chart-domain or numerical failure); the
  /// records stop at the last completed step.
  std::optional<std::string> failure;
  FilterDiagnostics diagnostics;
};

RunResult run_filter(const ScenarioConfig& cfg, const UpdateVariant& variant, const RunData& data,
                     std::uint64_t run_id);

/// Generates the run's data from (cfg.seed, run_id) and runs one variant.
RunResult run_filter(const ScenarioConfig& cfg, const UpdateVariant& variant,
                     std::uint64_t run_id);

struct VariantAggregate {
  std::string variant;
  std::vector<double> t;
  std::vector<double> mean_error;
  std::vector<double> median_error;
  std::vector<double> mean_energy;
  /// Number of runs contributing at each time index.
  std::vector<int> count;
  int failures = 0;
};

struct BatchResult {
  std::vector<UpdateVariant> variants;
  /// runs[v][r]: variant v, run r.
  std::vector<std::vector<RunResult>> runs;
  std::vector<VariantAggregate> aggregates;
};

/// `runs` paired runs of every variant. Run r uses streams derived from
/// (cfg.seed, r) for all variants. Work is spread over `threads` workers
/// (0 = hardware concurrency); results do not depend on the thread count.
BatchResult monte_carlo(const ScenarioConfig& cfg, const std::vector<UpdateVariant>& variants,
                        int runs, int threads = 0);

VariantAggregate aggregate(const std::string& label, const std::vector<RunResult>& runs);

/// Mean attitude error over records with t in [t0, t1]; nullopt if none.
std::optional<double> mean_error_in_window(const RunResult& run, double t0, double t1);

struct VariantSummary {
  std::string variant;
  double mean_transient_error = 0.0;
  double mean_steady_error = 0.0;
  double mean_energy = 0.0;
  int failures = 0;
  int runs = 0;
};

/// End of the transient window used in summaries, seconds.
inline constexpr double kTransientEnd = 5.0;

/// Transient: t ≤ kTransientEnd. Steady state: last third of the duration.
std::vector<VariantSummary> summarize(const BatchResult& batch, double duration);

}  // namespace manifold_ekf::sim
