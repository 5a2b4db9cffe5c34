#include "manifold_ekf/attitude_sim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "manifold_ekf/errors.hpp"
#include "manifold_ekf/linalg.hpp"
#include "manifold_ekf/product.hpp"

namespace manifold_ekf::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Eigen::Vector3d standard_normal3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  // Sequenced explicitly: argument evaluation order is unspecified.
  const double a = n(rng);
  const double b = n(rng);
  const double c = n(rng);
  return {a, b, c};
}

// Lower factor L with L Lᵀ = cov; handles PSD (possibly singular) input.
Eigen::Matrix3d sqrt_factor(const Eigen::Matrix3d& cov) {
  Eigen::LDLT<Eigen::Matrix3d> ldlt(cov);
  const Eigen::Vector3d d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::Matrix3d l = ldlt.matrixL();
  return ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
}

UnitVector perturb_direction(const UnitVector& clean, const Eigen::Vector3d& ambient_noise) {
  return sphere_exp(clean, project_to_tangent(clean, ambient_noise));
}

Eigen::MatrixXd tangent_cov(const UnitVector& p, const Eigen::Matrix3d& ambient) {
  const SphereBasis b = sphere_basis(p);
  return b.transpose() * ambient * b;
}

}  // namespace

OmegaProfile OmegaProfile::oscillatory(double amplitude) {
  OmegaProfile p;
  p.kind = Kind::kOscillatory;
  p.amplitude = amplitude;
  return p;
}

OmegaProfile OmegaProfile::constant_rate(const Eigen::Vector3d& omega) {
  OmegaProfile p;
  p.kind = Kind::kConstant;
  p.amplitude = 0.0;
  p.constant = omega;
  return p;
}

Eigen::Vector3d OmegaProfile::operator()(double t) const {
  if (kind == Kind::kConstant) return constant;
  return amplitude * Eigen::Vector3d(std::cos(t), std::sin(t), std::sin(t));
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt", "must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration)) fail("duration", "must be non-negative");
  if (!(gyro_var >= 0.0) || !std::isfinite(gyro_var)) fail("gyro_var", "must be non-negative");
  if (!(process_floor >= 0.0)) fail("process_floor", "must be non-negative");
  if (!omega(0.0).allFinite() || !std::isfinite(omega.amplitude)) fail("omega", "non-finite");
  if (!is_psd(meas_cov_ambient)) fail("meas_cov_ambient", "must be symmetric PSD");
  if (!is_spd(init_cov)) fail("init_cov", "must be symmetric positive-definite");
  for (const auto& [name, d] : {std::pair{"d1", d1}, std::pair{"d2", d2}}) {
    if (!d.allFinite() || std::abs(d.norm() - 1.0) > 1e-9) fail(name, "must be a unit vector");
  }
  if (d1.cross(d2).norm() < 1e-9) fail("d2", "must not be parallel to d1 (unobservable)");
}

std::size_t ScenarioConfig::steps() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

std::vector<TruthSample> simulate_truth(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.steps();
  std::vector<TruthSample> out;
  out.reserve(n + 1);
  Rotation r = Rotation::identity();
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const Eigen::Vector3d w = cfg.omega(t);
    out.push_back({t, r, w});
    r = (r * so3_exp(w * cfg.dt)).orthonormalized();
  }
  return out;
}

std::vector<SensorSample> simulate_sensors(const std::vector<TruthSample>& truth,
                                           const ScenarioConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  const double gyro_sd = std::sqrt(cfg.gyro_var);
  const Eigen::Matrix3d meas_sqrt = sqrt_factor(cfg.meas_cov_ambient);
  std::vector<SensorSample> out;
  if (truth.size() < 2) return out;
  out.reserve(truth.size() - 1);
  for (std::size_t k = 0; k + 1 < truth.size(); ++k) {
    const Eigen::Vector3d gyro = truth[k].omega + gyro_sd * standard_normal3(rng);
    const Eigen::Matrix3d& rt = truth[k + 1].attitude.matrix();
    const UnitVector clean1 = UnitVector::normalized(rt.transpose() * cfg.d1);
    const UnitVector clean2 = UnitVector::normalized(rt.transpose() * cfg.d2);
    const Eigen::Vector3d nu1 = meas_sqrt * standard_normal3(rng);
    const Eigen::Vector3d nu2 = meas_sqrt * standard_normal3(rng);
    out.push_back({gyro, perturb_direction(clean1, nu1), perturb_direction(clean2, nu2)});
  }
  return out;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t run_id, StreamPurpose purpose) {
  const std::uint64_t tag = 4 * run_id + static_cast<std::uint64_t>(purpose);
  return std::mt19937_64(splitmix64(seed ^ splitmix64(tag)));
}

RunData generate_run_data(const ScenarioConfig& cfg, std::uint64_t run_id) {
  RunData data;
  data.truth = simulate_truth(cfg);
  auto sensor_rng = make_stream(cfg.seed, run_id, StreamPurpose::kSensors);
  data.sensors = simulate_sensors(data.truth, cfg, sensor_rng);
  auto init_rng = make_stream(cfg.seed, run_id, StreamPurpose::kInitialEstimate);
  const Eigen::Matrix3d l = sqrt_factor(cfg.init_cov);
  data.initial_estimate = so3_exp(l * standard_normal3(init_rng));
  return data;
}

SystemModel attitude_system_model(const ScenarioConfig& cfg) {
  SystemModel sys;
  sys.state_space = std::make_shared<const SO3Manifold>();
  const double dt = cfg.dt;
  sys.propagate = [dt](const Point& p, const Eigen::VectorXd& u) {
    const Eigen::Vector3d w = u;
    return (Rotation::from_point(p) * so3_exp(w * dt)).to_point();
  };
  sys.input_cov = cfg.gyro_var * Eigen::MatrixXd::Identity(3, 3);
  sys.process_cov = cfg.process_floor * Eigen::MatrixXd::Identity(3, 3);
  return sys;
}

MeasurementModel attitude_measurement_model(const ScenarioConfig& cfg) {
  auto sphere = std::make_shared<const SphereManifold>();
  auto output = std::make_shared<const ProductManifold>(std::vector<ManifoldPtr>{sphere, sphere});
  MeasurementModel meas;
  meas.state_space = std::make_shared<const SO3Manifold>();
  meas.output_space = output;
  const Eigen::Vector3d d1 = cfg.d1;
  const Eigen::Vector3d d2 = cfg.d2;
  meas.observe = [output, d1, d2](const Point& p) {
    const Eigen::Matrix3d& r = Rotation::from_point(p).matrix();
    return output->join({UnitVector::normalized(r.transpose() * d1).to_point(),
                         UnitVector::normalized(r.transpose() * d2).to_point()});
  };
  const Eigen::Matrix3d ambient = cfg.meas_cov_ambient;
  meas.noise_cov = [output, ambient](const Point& y) {
    const auto parts = output->split(y);
    return block_diagonal(tangent_cov(UnitVector::from_point(parts[0]), ambient),
                          tangent_cov(UnitVector::from_point(parts[1]), ambient));
  };
  return meas;
}

RunResult run_filter(const ScenarioConfig& cfg, const UpdateVariant& variant, const RunData& data,
                     std::uint64_t run_id) {
  const SystemModel sys = attitude_system_model(cfg);
  const MeasurementModel meas = attitude_measurement_model(cfg);
  const auto* output = static_cast<const ProductManifold*>(meas.output_space.get());
  const ChartedManifold& so3 = *sys.state_space;

  RunResult result;
  result.variant = variant.label();
  result.run_id = run_id;
  result.records.reserve(data.truth.size());

  auto record = [&](const ConcentratedGaussian& belief, const TruthSample& truth) {
    const Rotation estimate = Rotation::from_point(belief.base);
    const double err = rotation_angle(estimate.inverse() * truth.attitude);
    const double energy = filter_energy(belief, so3, truth.attitude.to_point());
    result.records.push_back({truth.t, result.variant, run_id, err, energy});
  };

  ConcentratedGaussian belief =
      ConcentratedGaussian::centred(data.initial_estimate.to_point(), Eigen::MatrixXd(cfg.init_cov));
  try {
    record(belief, data.truth.front());
    for (std::size_t k = 0; k < data.sensors.size(); ++k) {
      const SensorSample& s = data.sensors[k];
      const TruthSample& next = data.truth[k + 1];
      const Point y = output->join({s.y1.to_point(), s.y2.to_point()});
      std::optional<Point> truth;
      if (variant.needs_truth()) truth = next.attitude.to_point();
      belief = filter_step(belief, sys, meas, s.gyro, y, variant, truth, &result.diagnostics);
      belief.base = Rotation::from_point(belief.base).orthonormalized().to_point();
      record(belief, next);
    }
  } catch (const Error& e) {
    result.failure = e.what();
  }
  return result;
}

RunResult run_filter(const ScenarioConfig& cfg, const UpdateVariant& variant,
                     std::uint64_t run_id) {
  return run_filter(cfg, variant, generate_run_data(cfg, run_id), run_id);
}

VariantAggregate aggregate(const std::string& label, const std::vector<RunResult>& runs) {
  VariantAggregate agg;
  agg.variant = label;
  std::size_t length = 0;
  for (const RunResult& r : runs) {
    length = std::max(length, r.records.size());
    if (r.failure) ++agg.failures;
  }
  agg.t.resize(length);
  agg.mean_error.assign(length, 0.0);
  agg.median_error.assign(length, 0.0);
  agg.mean_energy.assign(length, 0.0);
  agg.count.assign(length, 0);
  std::vector<double> column;
  for (std::size_t i = 0; i < length; ++i) {
    column.clear();
    double energy = 0.0;
    for (const RunResult& r : runs) {
      if (i >= r.records.size()) continue;
      agg.t[i] = r.records[i].t;
      column.push_back(r.records[i].attitude_error);
      energy += r.records[i].energy;
    }
    const auto n = static_cast<double>(column.size());
    agg.count[i] = static_cast<int>(column.size());
    double sum = 0.0;
    for (double e : column) sum += e;
    agg.mean_error[i] = sum / n;
    agg.mean_energy[i] = energy / n;
    std::sort(column.begin(), column.end());
    const std::size_t mid = column.size() / 2;
    agg.median_error[i] =
        column.size() % 2 == 1 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
  }
  return agg;
}

BatchResult monte_carlo(const ScenarioConfig& cfg, const std::vector<UpdateVariant>& variants,
                        int runs, int threads) {
  if (runs < 1) throw std::invalid_argument("monte_carlo: runs must be >= 1");
  cfg.validate();
  BatchResult batch;
  batch.variants = variants;
  batch.runs.assign(variants.size(), std::vector<RunResult>(static_cast<std::size_t>(runs)));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next.fetch_add(1); r < runs; r = next.fetch_add(1)) {
      const auto run_id = static_cast<std::uint64_t>(r);
      const RunData data = generate_run_data(cfg, run_id);
      for (std::size_t v = 0; v < variants.size(); ++v) {
        batch.runs[v][static_cast<std::size_t>(r)] = run_filter(cfg, variants[v], data, run_id);
      }
    }
  };
  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, runs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t v = 0; v < variants.size(); ++v) {
    batch.aggregates.push_back(aggregate(variants[v].label(), batch.runs[v]));
  }
  return batch;
}

std::optional<double> mean_error_in_window(const RunResult& run, double t0, double t1) {
  double sum = 0.0;
  int n = 0;
  for (const SimRecord& rec : run.records) {
    if (rec.t >= t0 && rec.t <= t1) {
      sum += rec.attitude_error;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::vector<VariantSummary> summarize(const BatchResult& batch, double duration) {
  const double steady_start = duration * 2.0 / 3.0;
  std::vector<VariantSummary> out;
  for (std::size_t v = 0; v < batch.variants.size(); ++v) {
    VariantSummary s;
    s.variant = batch.variants[v].label();
    double transient = 0.0, steady = 0.0, energy = 0.0;
    long n_transient = 0, n_steady = 0, n_energy = 0;
    for (const RunResult& run : batch.runs[v]) {
      ++s.runs;
      if (run.failure) ++s.failures;
      for (const SimRecord& rec : run.records) {
        if (rec.t <= kTransientEnd) {
          transient += rec.attitude_error;
          ++n_transient;
        }
        if (rec.t >= steady_start) {
          steady += rec.attitude_error;
          ++n_steady;
        }
        energy += rec.energy;
        ++n_energy;
      }
    }
    s.mean_transient_error = n_transient > 0 ? transient / n_transient : 0.0;
    s.mean_steady_error = n_steady > 0 ? steady / n_steady : 0.0;
    s.mean_energy = n_energy > 0 ? energy / n_energy : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace manifold_ekf::sim
