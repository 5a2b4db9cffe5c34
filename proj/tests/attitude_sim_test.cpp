#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "manifold_ekf/attitude_sim.hpp"
#include "manifold_ekf/errors.hpp"
#include "test_support.hpp"

using namespace manifold_ekf;
using namespace manifold_ekf::sim;
using namespace test_support;

namespace {

ScenarioConfig short_config(double duration) {
  ScenarioConfig cfg;
  cfg.duration = duration;
  return cfg;
}

}  // namespace

TEST(ScenarioDefaults, ReferenceExperimentValues) {
  const ScenarioConfig cfg;
  EXPECT_EQ(cfg.dt, 0.02);
  EXPECT_EQ(cfg.gyro_var, 0.02);
  EXPECT_EQ(cfg.meas_cov_ambient, Eigen::Matrix3d(Eigen::Vector3d(0.01, 0.03, 0.05).asDiagonal()));
  EXPECT_EQ(cfg.d1, Eigen::Vector3d(0, 1, 0));
  EXPECT_LT((cfg.d2 - Eigen::Vector3d(1, 0, 1) / std::sqrt(2.0)).norm(), 1e-16);
  EXPECT_EQ(cfg.init_cov, Eigen::Matrix3d(2.25 * Eigen::Matrix3d::Identity()));
  EXPECT_EQ(cfg.steps(), 1500u);
  const Eigen::Vector3d w = cfg.omega(1.3);
  EXPECT_LT((w - 0.1 * Eigen::Vector3d(std::cos(1.3), std::sin(1.3), std::sin(1.3))).norm(), 1e-16);
}

TEST(ScenarioDefaults, ValidationNamesField) {
  auto expect_field = [](ScenarioConfig cfg, const std::string& field) {
    try {
      cfg.validate();
      ADD_FAILURE() << "expected rejection of " << field;
    } catch (const std::invalid_argument& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  ScenarioConfig c;
  c.dt = 0.0;
  expect_field(c, "dt");
  c = ScenarioConfig{};
  c.duration = -1.0;
  expect_field(c, "duration");
  c = ScenarioConfig{};
  c.d2 = c.d1;
  expect_field(c, "d2");
  c = ScenarioConfig{};
  c.meas_cov_ambient(1, 1) = -0.1;
  expect_field(c, "meas_cov_ambient");
  c = ScenarioConfig{};
  c.init_cov = Eigen::Matrix3d::Zero();
  expect_field(c, "init_cov");
}

TEST(SimulateTruth, ZeroRateStaysAtIdentity) {
  ScenarioConfig cfg = short_config(2.0);
  cfg.omega = OmegaProfile::constant_rate(Eigen::Vector3d::Zero());
  const auto truth = simulate_truth(cfg);
  ASSERT_EQ(truth.size(), cfg.steps() + 1);
  for (const auto& s : truth) EXPECT_EQ(s.attitude.matrix(), Eigen::Matrix3d::Identity());
}

TEST(SimulateTruth, ConstantAxisIntegratesExactly) {
  ScenarioConfig cfg = short_config(10.0);
  cfg.omega = OmegaProfile::constant_rate(Eigen::Vector3d(0.1, 0, 0));
  const auto truth = simulate_truth(cfg);
  const Eigen::Matrix3d expected = Eigen::AngleAxisd(1.0, Eigen::Vector3d::UnitX()).toRotationMatrix();
  EXPECT_NEAR(truth.back().t, 10.0, 1e-12);
  EXPECT_LT((truth.back().attitude.matrix() - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SimulateTruth, FirstOrderConvergenceInStep) {
  const double horizon = 2.0 * std::numbers::pi;
  // Align all three grids on a common end time.
  const double t_end = 0.04 * std::round(horizon / 0.04);
  auto at = [&](double dt) {
    ScenarioConfig cfg;
    cfg.dt = dt;
    cfg.duration = t_end;
    return simulate_truth(cfg).back().attitude;
  };
  const Rotation a = at(0.04), b = at(0.02), c = at(0.01);
  const double e1 = rotation_angle(a.inverse() * b);
  const double e2 = rotation_angle(b.inverse() * c);
  EXPECT_GT(e2, 0.0);
  EXPECT_NEAR(e1 / e2, 2.0, 0.2);
  EXPECT_LT(e2, 0.02);
}

TEST(SimulateSensors, ZeroNoiseGivesExactOutputs) {
  ScenarioConfig cfg = short_config(1.0);
  cfg.gyro_var = 0.0;
  cfg.meas_cov_ambient.setZero();
  const auto truth = simulate_truth(cfg);
  std::mt19937_64 rng(51);
  const auto sensors = simulate_sensors(truth, cfg, rng);
  ASSERT_EQ(sensors.size(), truth.size() - 1);
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    EXPECT_EQ(sensors[k].gyro, truth[k].omega);
    const Eigen::Matrix3d rt = truth[k + 1].attitude.matrix().transpose();
    EXPECT_LT((sensors[k].y1.vec() - rt * cfg.d1).norm(), 1e-15);
    EXPECT_LT((sensors[k].y2.vec() - rt * cfg.d2).norm(), 1e-15);
  }
}

TEST(SimulateSensors, GyroVarianceMatches) {
  ScenarioConfig cfg = short_config(2000.0);  // 10⁵ steps
  cfg.omega = OmegaProfile::constant_rate(Eigen::Vector3d::Zero());
  const auto truth = simulate_truth(cfg);
  std::mt19937_64 rng(52);
  const auto sensors = simulate_sensors(truth, cfg, rng);
  ASSERT_EQ(sensors.size(), 100000u);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero(), sq = Eigen::Vector3d::Zero();
  for (const auto& s : sensors) {
    sum += s.gyro;
    sq += s.gyro.cwiseProduct(s.gyro);
  }
  const double n = static_cast<double>(sensors.size());
  const Eigen::Vector3d var = sq / n - (sum / n).cwiseProduct(sum / n);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(var(i), 0.02, 0.02 * 0.01);
}

TEST(SimulateSensors, DirectionTangentCovarianceMatchesProjection) {
  ScenarioConfig cfg = short_config(2000.0);
  cfg.omega = OmegaProfile::constant_rate(Eigen::Vector3d::Zero());
  const auto truth = simulate_truth(cfg);
  std::mt19937_64 rng(53);
  const auto sensors = simulate_sensors(truth, cfg, rng);
  for (const Eigen::Vector3d& d : {cfg.d1, cfg.d2}) {
    const UnitVector clean(d);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& s : sensors) {
      const Eigen::Vector2d v = sphere_log(d == cfg.d1 ? s.y1 : s.y2, clean);
      cov += v * v.transpose();
    }
    cov /= static_cast<double>(sensors.size());
    const SphereBasis b = sphere_basis(clean);
    const Eigen::Matrix2d projected = b.transpose() * cfg.meas_cov_ambient * b;
    EXPECT_LT((cov - projected).cwiseAbs().maxCoeff(), 0.05 * projected.cwiseAbs().maxCoeff());
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(cov(i, i), projected(i, i), 0.05 * projected(i, i));
  }
}

TEST(Streams, DeterministicAndPurposeSeparated) {
  auto a = make_stream(7, 3, StreamPurpose::kSensors);
  auto b = make_stream(7, 3, StreamPurpose::kSensors);
  auto c = make_stream(7, 3, StreamPurpose::kInitialEstimate);
  auto d = make_stream(7, 4, StreamPurpose::kSensors);
  const auto first = a();
  EXPECT_EQ(first, b());
  EXPECT_NE(first, c());
  EXPECT_NE(first, d());
}

TEST(MeasurementModelQ, ProjectsAmbientCovariancePerDirection) {
  const ScenarioConfig cfg;
  const MeasurementModel meas = attitude_measurement_model(cfg);
  const Rotation r = so3_exp(Eigen::Vector3d(0.4, -0.3, 0.2));
  const Point y = meas.observe(r.to_point());
  const Eigen::MatrixXd q = meas.noise_cov(y);
  const auto* prod = dynamic_cast<const ProductManifold*>(meas.output_space.get());
  const auto parts = prod->split(y);
  for (int i = 0; i < 2; ++i) {
    const SphereBasis b = sphere_basis(UnitVector::from_point(parts[i]));
    EXPECT_LT((q.block(2 * i, 2 * i, 2, 2) - b.transpose() * cfg.meas_cov_ambient * b).norm(), 1e-15);
  }
  EXPECT_EQ(q.topRightCorner(2, 2), Eigen::Matrix2d::Zero());
  EXPECT_LT((parts[0].coords() - r.matrix().transpose() * cfg.d1).norm(), 1e-15);
}

TEST(RunFilter, NoiselessPerfectStartTracksExactly) {
  ScenarioConfig data_cfg = short_config(5.0);
  data_cfg.gyro_var = 0.0;
  data_cfg.meas_cov_ambient.setZero();
  RunData data = generate_run_data(data_cfg, 0);
  data.initial_estimate = Rotation::identity();
  // The filter still needs an invertible innovation covariance.
  ScenarioConfig filter_cfg = data_cfg;
  filter_cfg.meas_cov_ambient = 1e-6 * Eigen::Matrix3d::Identity();
  filter_cfg.gyro_var = 1e-6;
  const RunResult r = run_filter(filter_cfg, UpdateVariant::naive_posterior(), data, 0);
  ASSERT_FALSE(r.failure);
  ASSERT_EQ(r.records.size(), data_cfg.steps() + 1);
  for (const auto& rec : r.records) EXPECT_LE(rec.attitude_error, 1e-6);
}

TEST(RunFilter, InitialEnergyIsChiSquared) {
  // A concentrated prior keeps the sampled errors far from the cut locus,
  // where the wrapped error would no longer be Gaussian.
  ScenarioConfig cfg = short_config(0.0);
  cfg.init_cov = 0.1 * 0.1 * Eigen::Matrix3d::Identity();
  std::vector<double> samples;
  for (std::uint64_t run = 0; run < 2000; ++run) {
    const RunResult r = run_filter(cfg, UpdateVariant::baseline(), run);
    ASSERT_EQ(r.records.size(), 1u);
    samples.push_back(3.0 * r.records.front().energy);
  }
  EXPECT_GT(ks_pvalue(samples, chi2_3_cdf), 0.01);
}

TEST(RunFilter, RecordsAreWellFormed) {
  const ScenarioConfig cfg = short_config(3.0);
  const RunResult r = run_filter(cfg, UpdateVariant::iterated(2), 1);
  ASSERT_FALSE(r.failure);
  EXPECT_EQ(r.variant, "iterated_2");
  EXPECT_EQ(r.records.size(), cfg.steps() + 1);
  for (std::size_t k = 0; k < r.records.size(); ++k) {
    const auto& rec = r.records[k];
    EXPECT_NEAR(rec.t, k * cfg.dt, 1e-12);
    EXPECT_GE(rec.attitude_error, 0.0);
    EXPECT_LE(rec.attitude_error, std::numbers::pi);
    EXPECT_GE(rec.energy, 0.0);
    EXPECT_EQ(rec.run_id, 1u);
  }
}

TEST(RunFilter, DivergenceIsTaggedAndTruncates) {
  const ScenarioConfig cfg = short_config(1.0);
  int tagged = 0;
  for (std::uint64_t run = 0; run < 40; ++run) {
    const RunResult r = run_filter(cfg, UpdateVariant::baseline(), run);
    if (!r.failure) continue;
    ++tagged;
    EXPECT_LT(r.records.size(), cfg.steps() + 1);
    EXPECT_FALSE(r.failure->empty());
  }
  EXPECT_GT(tagged, 0) << "the wide initial prior should push some run past the chart";
}

TEST(RunFilter, ConvergedEnergyIsOrderOne) {
  const ScenarioConfig cfg;
  const RunResult r = run_filter(cfg, UpdateVariant::baseline(), 0);
  ASSERT_FALSE(r.failure);
  double sum = 0.0;
  int n = 0;
  for (const auto& rec : r.records) {
    if (rec.t >= 10.0) {
      sum += rec.energy;
      ++n;
    }
  }
  EXPECT_GE(sum / n, 0.2);
  EXPECT_LE(sum / n, 5.0);
}

TEST(MonteCarlo, SingleRunMatchesRunFilter) {
  const ScenarioConfig cfg = short_config(2.0);
  const BatchResult batch = monte_carlo(cfg, {UpdateVariant::measurement()}, 1, 1);
  const RunResult direct = run_filter(cfg, UpdateVariant::measurement(), 0);
  ASSERT_EQ(batch.runs.size(), 1u);
  ASSERT_EQ(batch.runs[0].size(), 1u);
  ASSERT_EQ(batch.runs[0][0].records.size(), direct.records.size());
  for (std::size_t i = 0; i < direct.records.size(); ++i) {
    EXPECT_EQ(batch.runs[0][0].records[i].attitude_error, direct.records[i].attitude_error);
    EXPECT_EQ(batch.runs[0][0].records[i].energy, direct.records[i].energy);
  }
  EXPECT_EQ(batch.aggregates[0].mean_error[5], direct.records[5].attitude_error);
}

TEST(MonteCarlo, IdenticalVariantsGiveIdenticalAggregates) {
  const ScenarioConfig cfg = short_config(2.0);
  const BatchResult batch =
      monte_carlo(cfg, {UpdateVariant::baseline(), UpdateVariant::baseline()}, 4, 2);
  EXPECT_EQ(batch.aggregates[0].mean_error, batch.aggregates[1].mean_error);
  EXPECT_EQ(batch.aggregates[0].median_error, batch.aggregates[1].median_error);
  EXPECT_EQ(batch.aggregates[0].mean_energy, batch.aggregates[1].mean_energy);
}

TEST(MonteCarlo, ResultsIndependentOfThreadCount) {
  const ScenarioConfig cfg = short_config(1.0);
  const std::vector<UpdateVariant> variants = {UpdateVariant::baseline(), UpdateVariant::iterated(2)};
  const BatchResult a = monte_carlo(cfg, variants, 6, 1);
  const BatchResult b = monte_carlo(cfg, variants, 6, 4);
  for (std::size_t v = 0; v < variants.size(); ++v) {
    EXPECT_EQ(a.aggregates[v].mean_error, b.aggregates[v].mean_error);
    for (int r = 0; r < 6; ++r) {
      ASSERT_EQ(a.runs[v][r].records.size(), b.runs[v][r].records.size());
      for (std::size_t i = 0; i < a.runs[v][r].records.size(); ++i) {
        EXPECT_EQ(a.runs[v][r].records[i].energy, b.runs[v][r].records[i].energy);
      }
    }
  }
}

TEST(MonteCarlo, PairedNoiseAcrossVariants) {
  // Variants differ only in the filter, so the t = 0 records coincide.
  const ScenarioConfig cfg = short_config(0.5);
  const BatchResult batch =
      monte_carlo(cfg, {UpdateVariant::baseline(), UpdateVariant::measurement()}, 5, 2);
  for (int r = 0; r < 5; ++r) {
    EXPECT_EQ(batch.runs[0][r].records.front().attitude_error,
              batch.runs[1][r].records.front().attitude_error);
  }
}

TEST(MonteCarlo, RejectsEmptyBatch) {
  EXPECT_THROW(monte_carlo(ScenarioConfig{}, {UpdateVariant::baseline()}, 0), std::invalid_argument);
}

TEST(Summary, WindowsAndCounts) {
  ScenarioConfig cfg = short_config(6.0);
  const BatchResult batch = monte_carlo(cfg, {UpdateVariant::baseline()}, 3, 1);
  const auto summary = summarize(batch, cfg.duration);
  ASSERT_EQ(summary.size(), 1u);
  EXPECT_EQ(summary[0].variant, "baseline");
  EXPECT_EQ(summary[0].runs, 3);
  // Record-weighted over every record in the window.
  double expected = 0.0;
  int n = 0;
  for (const auto& run : batch.runs[0]) {
    for (const auto& rec : run.records) {
      if (rec.t > kTransientEnd) continue;
      expected += rec.attitude_error;
      ++n;
    }
  }
  EXPECT_NEAR(summary[0].mean_transient_error, expected / n, 1e-15);
}
