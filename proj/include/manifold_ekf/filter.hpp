#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>

#include "manifold_ekf/geometry.hpp"
#include "manifold_ekf/manifold.hpp"

namespace manifold_ekf {

/// Error-state belief: ξ ~ N_ξ̂(μ, Σ), Gaussian in normal coordinates at
/// `base`. The normalizing factor is never needed and not represented.
struct ConcentratedGaussian {
  Point base;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  /// Zero mean at `base`.
  static ConcentratedGaussian centred(Point base, Eigen::MatrixXd cov);

  /// Throws if sizes disagree with `space`, Σ is not SPD, or μ leaves the chart.
  void validate(const ChartedManifold& space) const;
};

/// Jacobian with respect to the input, evaluated at (ξ, u).
using InputJacobian = std::function<Eigen::MatrixXd(const Point&, const Eigen::VectorXd&)>;

/// ξ⁺ = F(ξ, u) ⊞ κ, with input noise mapped through B = D_u F and an
/// additive process-noise floor: R = R^P + B R^I Bᵀ.
struct SystemModel {
  ManifoldPtr state_space;
  std::function<Point(const Point&, const Eigen::VectorXd&)> propagate;
  Eigen::MatrixXd input_cov;    // R^I
  Eigen::MatrixXd process_cov;  // R^P
  /// Analytic B; finite differences when empty.
  InputJacobian input_jacobian;
  /// Analytic A in normal coordinates; finite differences when empty.
  InputJacobian state_jacobian;
  DiffScheme scheme = DiffScheme::kCentral;

  void validate() const;
};

/// y = h(ξ) ⊞ ν with ν ~ N(0, Q).
///
/// Q may depend on the output point at which the noise is expressed (its
/// tangent basis), so it is supplied as a function of that point. Use
/// constant_noise() when it does not.
struct MeasurementModel {
  ManifoldPtr state_space;
  ManifoldPtr output_space;
  std::function<Point(const Point&)> observe;
  std::function<Eigen::MatrixXd(const Point&)> noise_cov;
  /// Analytic C; finite differences when empty.
  std::function<Eigen::MatrixXd(const Point&)> output_jacobian;
  DiffScheme scheme = DiffScheme::kCentral;

  static std::function<Eigen::MatrixXd(const Point&)> constant_noise(Eigen::MatrixXd q);
  void validate() const;
};

/// Tag required to construct the TrueOutput variant, which reads the
/// simulated ground truth and is only meaningful in simulation.
struct DiagnosticsOptIn {
  explicit DiagnosticsOptIn() = default;
};

/// How the measurement covariance is placed before the Kalman update, and
/// whether the reset transports Σ.
class UpdateVariant {
 public:
  enum class Kind { kBaseline, kTrueOutput, kMeasurement, kNaivePosterior, kIterated };

  static UpdateVariant baseline();
  static UpdateVariant true_output(DiagnosticsOptIn);
  static UpdateVariant measurement();
  static UpdateVariant naive_posterior();
  /// count = 0 is the plain update; count = 1 matches naive_posterior().
  static UpdateVariant iterated(int count);

  UpdateVariant with_geometric_reset(bool on) const;
  /// Optional early exit for iterated updates once the trial mean moves by
  /// less than `tol` between passes. Off by default.
  UpdateVariant with_convergence_tolerance(double tol) const;

  Kind kind() const { return kind_; }
  int iterations() const { return iterations_; }
  bool geometric_reset() const { return geometric_reset_; }
  std::optional<double> convergence_tolerance() const { return tolerance_; }
  bool needs_truth() const { return kind_ == Kind::kTrueOutput; }

  /// Stable identifier, e.g. "baseline", "iterated_5", "measurement_noreset".
  std::string label() const;

  friend bool operator==(const UpdateVariant&, const UpdateVariant&) = default;

 private:
  UpdateVariant(Kind kind, int iterations, bool reset)
      : kind_(kind), iterations_(iterations), geometric_reset_(reset) {}

  Kind kind_;
  int iterations_;
  bool geometric_reset_;
  std::optional<double> tolerance_;
};

/// Counters filled by the step functions when a pointer is supplied.
struct FilterDiagnostics {
  long eigenvalue_floors = 0;
  long iterations_run = 0;
};

/// Eigenvalue floor used when a covariance fails its SPD factorization.
inline constexpr double kCovarianceFloor = 1e-12;

Eigen::MatrixXd combine_noise(const SystemModel& sys, const Point& xi, const Eigen::VectorXd& u);

/// A = D(ε ↦ F(ξ̂ ⊞ ε, u) ⊟ F(ξ̂, u)) at ε = 0.
Eigen::MatrixXd state_transition_matrix(const SystemModel& sys, const Point& xi,
                                        const Eigen::VectorXd& u);

/// Propagates the base point and sets Σ ← A Σ Aᵀ + R. Requires zero mean.
ConcentratedGaussian predict(const ConcentratedGaussian& state, const SystemModel& sys,
                             const Eigen::VectorXd& u, FilterDiagnostics* diag = nullptr);

/// ỹ = y ⊟ h(ξ̂).
Eigen::VectorXd innovation(const MeasurementModel& meas, const Point& xi, const Point& y);

/// C = D(ε ↦ h(ξ̂ ⊞ ε) ⊟ h(ξ̂)) at ε = 0.
Eigen::MatrixXd output_matrix(const MeasurementModel& meas, const Point& xi);

/// Q evaluated at `anchor` and transported along the output geodesic from
/// `anchor` to `predicted`.
Eigen::MatrixXd transported_q(const MeasurementModel& meas, const Point& anchor,
                              const Point& predicted);

/// K = Σ Cᵀ (C Σ Cᵀ + Q)⁻¹. Throws SingularInnovationError.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& c,
                            const Eigen::MatrixXd& q);

/// Kalman update in coordinates at the prior base point. The returned belief
/// keeps the base point and carries the posterior mean; apply reset() next.
/// `truth` must be given iff the variant is TrueOutput.
ConcentratedGaussian update(const ConcentratedGaussian& state, const MeasurementModel& meas,
                            const Point& y, const UpdateVariant& variant,
                            const std::optional<Point>& truth = std::nullopt,
                            FilterDiagnostics* diag = nullptr);

/// Moves the base to ξ̂ ⊞ μ and zeroes the mean. With `geometric`, Σ is
/// parallel-transported along that geodesic; otherwise it is kept as is.
ConcentratedGaussian reset(const ConcentratedGaussian& state, const ChartedManifold& space,
                           bool geometric, FilterDiagnostics* diag = nullptr);

/// (1/m) εᵀ Σ⁻¹ ε with ε = truth ⊟ ξ̂ (normalized estimation error squared).
double filter_energy(const ConcentratedGaussian& state, const ChartedManifold& space,
                     const Point& truth);

/// predict, update and reset in sequence.
ConcentratedGaussian filter_step(const ConcentratedGaussian& state, const SystemModel& sys,
                                 const MeasurementModel& meas, const Eigen::VectorXd& u,
                                 const Point& y, const UpdateVariant& variant,
                                 const std::optional<Point>& truth = std::nullopt,
                                 FilterDiagnostics* diag = nullptr);

}  // namespace manifold_ekf
