#include "manifold_ekf/filter.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

#include "manifold_ekf/errors.hpp"
#include "manifold_ekf/euclidean.hpp"
#include "manifold_ekf/linalg.hpp"

namespace manifold_ekf {

namespace {

constexpr double kZeroMeanTolerance = 1e-12;

void require_zero_mean(const ConcentratedGaussian& state, const char* op) {
  if (state.mean.size() > 0 && state.mean.cwiseAbs().maxCoeff() > kZeroMeanTolerance) {
    throw std::invalid_argument(std::string(op) + ": belief must have zero mean (reset first)");
  }
}

// Symmetrize, and fall back to an eigenvalue floor if the factorization fails.
Eigen::MatrixXd settle_covariance(const Eigen::MatrixXd& cov, const char* op,
                                  FilterDiagnostics* diag) {
  Eigen::MatrixXd out = symmetrize(cov);
  if (is_spd(out)) return out;
  if (!out.allFinite()) throw NotSPDError(std::string(op) + ": covariance became non-finite");
  std::clog << "[manifold_ekf] warning: " << op
            << ": covariance failed SPD factorization, flooring eigenvalues at "
            << kCovarianceFloor << '\n';
  if (diag != nullptr) ++diag->eigenvalue_floors;
  return floor_eigenvalues(out, kCovarianceFloor);
}

void check_square(const Eigen::MatrixXd& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionError(std::string(what) + " must be " + std::to_string(n) + "x" +
                         std::to_string(n));
  }
}

}  // namespace

ConcentratedGaussian ConcentratedGaussian::centred(Point base, Eigen::MatrixXd cov) {
  const Eigen::Index m = cov.rows();
  return ConcentratedGaussian{std::move(base), Eigen::VectorXd::Zero(m), std::move(cov)};
}

void ConcentratedGaussian::validate(const ChartedManifold& space) const {
  space.validate(base);
  if (mean.size() != space.dim()) throw DimensionError("ConcentratedGaussian: mean size mismatch");
  check_square(cov, space.dim(), "ConcentratedGaussian covariance");
  if (!is_symmetric(cov, 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()))) {
    throw NotSPDError("ConcentratedGaussian: covariance is not symmetric");
  }
  require_spd(cov, "ConcentratedGaussian covariance");
  if (!space.in_chart_domain(mean)) {
    throw ChartDomainError("ConcentratedGaussian: mean is outside the chart domain");
  }
}

void SystemModel::validate() const {
  if (!state_space || !propagate) throw std::invalid_argument("SystemModel: incomplete model");
  check_square(process_cov, state_space->dim(), "SystemModel process covariance");
  if (input_cov.rows() != input_cov.cols()) {
    throw DimensionError("SystemModel input covariance must be square");
  }
  if (!is_psd(process_cov) || !is_psd(input_cov)) {
    throw NotSPDError("SystemModel: noise covariances must be symmetric PSD");
  }
}

std::function<Eigen::MatrixXd(const Point&)> MeasurementModel::constant_noise(Eigen::MatrixXd q) {
  return [q = std::move(q)](const Point&) { return q; };
}

void MeasurementModel::validate() const {
  if (!state_space || !output_space || !observe || !noise_cov) {
    throw std::invalid_argument("MeasurementModel: incomplete model");
  }
}

UpdateVariant UpdateVariant::baseline() { return {Kind::kBaseline, 0, false}; }

UpdateVariant UpdateVariant::true_output(DiagnosticsOptIn) { return {Kind::kTrueOutput, 0, true}; }

UpdateVariant UpdateVariant::measurement() { return {Kind::kMeasurement, 0, true}; }

UpdateVariant UpdateVariant::naive_posterior() { return {Kind::kNaivePosterior, 1, true}; }

UpdateVariant UpdateVariant::iterated(int count) {
  if (count < 0) throw std::invalid_argument("UpdateVariant: iteration count must be >= 0");
  return {Kind::kIterated, count, true};
}

UpdateVariant UpdateVariant::with_geometric_reset(bool on) const {
  UpdateVariant v = *this;
  v.geometric_reset_ = on;
  return v;
}

UpdateVariant UpdateVariant::with_convergence_tolerance(double tol) const {
  if (!(tol > 0.0)) throw std::invalid_argument("UpdateVariant: tolerance must be positive");
  UpdateVariant v = *this;
  v.tolerance_ = tol;
  return v;
}

std::string UpdateVariant::label() const {
  std::string out;
  bool default_reset = true;
  switch (kind_) {
    case Kind::kBaseline:
      out = "baseline";
      default_reset = false;
      break;
    case Kind::kTrueOutput: out = "true_output"; break;
    case Kind::kMeasurement: out = "measurement"; break;
    case Kind::kNaivePosterior: out = "naive_posterior"; break;
    case Kind::kIterated: out = "iterated_" + std::to_string(iterations_); break;
  }
  if (geometric_reset_ != default_reset) out += geometric_reset_ ? "_reset" : "_noreset";
  return out;
}

Eigen::MatrixXd combine_noise(const SystemModel& sys, const Point& xi, const Eigen::VectorXd& u) {
  Eigen::MatrixXd b;
  if (sys.input_jacobian) {
    b = sys.input_jacobian(xi, u);
  } else {
    const EuclideanSpace inputs(static_cast<int>(u.size()));
    b = fd_jacobian(
        inputs, *sys.state_space,
        [&](const Point& v) { return sys.propagate(xi, v.coords()); }, Point(u), sys.scheme);
  }
  if (b.rows() != sys.state_space->dim() || b.cols() != sys.input_cov.rows()) {
    throw DimensionError("combine_noise: input Jacobian has the wrong shape");
  }
  return symmetrize(sys.process_cov + b * sys.input_cov * b.transpose());
}

Eigen::MatrixXd state_transition_matrix(const SystemModel& sys, const Point& xi,
                                        const Eigen::VectorXd& u) {
  if (sys.state_jacobian) return sys.state_jacobian(xi, u);
  return fd_jacobian(
      *sys.state_space, *sys.state_space, [&](const Point& p) { return sys.propagate(p, u); }, xi,
      sys.scheme);
}

ConcentratedGaussian predict(const ConcentratedGaussian& state, const SystemModel& sys,
                             const Eigen::VectorXd& u, FilterDiagnostics* diag) {
  require_zero_mean(state, "predict");
  const Eigen::MatrixXd a = state_transition_matrix(sys, state.base, u);
  const Eigen::MatrixXd r = combine_noise(sys, state.base, u);
  Point next = sys.propagate(state.base, u);
  Eigen::MatrixXd cov = settle_covariance(a * state.cov * a.transpose() + r, "predict", diag);
  return ConcentratedGaussian{std::move(next), Eigen::VectorXd::Zero(state.mean.size()),
                              std::move(cov)};
}

Eigen::VectorXd innovation(const MeasurementModel& meas, const Point& xi, const Point& y) {
  return meas.output_space->boxminus(y, meas.observe(xi));
}

Eigen::MatrixXd output_matrix(const MeasurementModel& meas, const Point& xi) {
  if (meas.output_jacobian) return meas.output_jacobian(xi);
  return fd_jacobian(*meas.state_space, *meas.output_space, meas.observe, xi, meas.scheme);
}

Eigen::MatrixXd transported_q(const MeasurementModel& meas, const Point& anchor,
                              const Point& predicted) {
  const ChartedManifold& out = *meas.output_space;
  const Eigen::VectorXd along = out.boxminus(predicted, anchor);
  const TransportMatrix p = out.transport_along_geodesic(anchor, along);
  return transport_covariance(p, meas.noise_cov(anchor));
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& c,
                            const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd s = symmetrize(c * cov * c.transpose() + q);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  if (!s.allFinite() || ldlt.info() != Eigen::Success ||
      !(ldlt.vectorD().minCoeff() > kSpdPivotTolerance)) {
    throw SingularInnovationError("innovation covariance C Σ Cᵀ + Q is not invertible");
  }
  // K = Σ Cᵀ S⁻¹ = (S⁻¹ C Σ)ᵀ since S and Σ are symmetric.
  return ldlt.solve(c * cov).transpose();
}

ConcentratedGaussian update(const ConcentratedGaussian& state, const MeasurementModel& meas,
                            const Point& y, const UpdateVariant& variant,
                            const std::optional<Point>& truth, FilterDiagnostics* diag) {
  require_zero_mean(state, "update");
  if (variant.needs_truth() != truth.has_value()) {
    throw std::invalid_argument(variant.needs_truth()
                                    ? "update: the true_output variant needs the true state"
                                    : "update: truth may only be supplied to true_output");
  }
  const ChartedManifold& space = *meas.state_space;
  const Point predicted = meas.observe(state.base);
  const Eigen::VectorXd innov = meas.output_space->boxminus(y, predicted);
  const Eigen::MatrixXd c = output_matrix(meas, state.base);

  Eigen::MatrixXd q;
  switch (variant.kind()) {
    case UpdateVariant::Kind::kBaseline:
      q = meas.noise_cov(predicted);
      break;
    case UpdateVariant::Kind::kTrueOutput:
      q = transported_q(meas, meas.observe(*truth), predicted);
      break;
    case UpdateVariant::Kind::kMeasurement:
      q = transported_q(meas, y, predicted);
      break;
    case UpdateVariant::Kind::kNaivePosterior:
    case UpdateVariant::Kind::kIterated: {
      q = meas.noise_cov(predicted);
      std::optional<Eigen::VectorXd> previous;
      for (int i = 0; i < variant.iterations(); ++i) {
        const Eigen::VectorXd trial_mean = kalman_gain(state.cov, c, q) * innov;
        const Point trial_base = space.boxplus(state.base, trial_mean);
        q = transported_q(meas, meas.observe(trial_base), predicted);
        if (diag != nullptr) ++diag->iterations_run;
        if (const auto tol = variant.convergence_tolerance();
            tol && previous && (trial_mean - *previous).norm() < *tol) {
          break;
        }
        previous = trial_mean;
      }
      break;
    }
  }

  const Eigen::MatrixXd k = kalman_gain(state.cov, c, q);
  const Eigen::Index m = state.cov.rows();
  Eigen::MatrixXd cov = settle_covariance(
      (Eigen::MatrixXd::Identity(m, m) - k * c) * state.cov, "update", diag);
  return ConcentratedGaussian{state.base, k * innov, std::move(cov)};
}

ConcentratedGaussian reset(const ConcentratedGaussian& state, const ChartedManifold& space,
                           bool geometric, FilterDiagnostics* diag) {
  Point base = space.boxplus(state.base, state.mean);
  Eigen::MatrixXd cov = state.cov;
  if (geometric) {
    const TransportMatrix p = space.transport_along_geodesic(state.base, state.mean);
    cov = transport_covariance(p, settle_covariance(cov, "reset", diag));
  }
  cov = settle_covariance(cov, "reset", diag);
  return ConcentratedGaussian{std::move(base), Eigen::VectorXd::Zero(state.mean.size()),
                              std::move(cov)};
}

double filter_energy(const ConcentratedGaussian& state, const ChartedManifold& space,
                     const Point& truth) {
  require_zero_mean(state, "filter_energy");
  require_spd(state.cov, "filter covariance");
  const Eigen::VectorXd err = space.boxminus(truth, state.base);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(state.cov);
  return err.dot(ldlt.solve(err)) / static_cast<double>(space.dim());
}

ConcentratedGaussian filter_step(const ConcentratedGaussian& state, const SystemModel& sys,
                                 const MeasurementModel& meas, const Eigen::VectorXd& u,
                                 const Point& y, const UpdateVariant& variant,
                                 const std::optional<Point>& truth, FilterDiagnostics* diag) {
  const ConcentratedGaussian prior = predict(state, sys, u, diag);
  const ConcentratedGaussian posterior = update(prior, meas, y, variant, truth, diag);
  return reset(posterior, *sys.state_space, variant.geometric_reset(), diag);
}

}  // namespace manifold_ekf
