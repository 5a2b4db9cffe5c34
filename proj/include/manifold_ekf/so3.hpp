#pragma once

#include <Eigen/Core>
#include <numbers>

#include "manifold_ekf/manifold.hpp"

namespace manifold_ekf {

/// so3_log refuses rotation angles within this margin of π.
inline constexpr double kSo3CutLocusMargin = 1e-6;

/// Element of SO(3). Construction checks RᵀR = I and det R = +1 to 1e-9.
class Rotation {
 public:
  Rotation() : mat_(Eigen::Matrix3d::Identity()) {}
  explicit Rotation(const Eigen::Matrix3d& mat);

  static Rotation identity() { return Rotation(); }
  /// Nearest rotation in the Frobenius sense (polar factor via SVD).
  static Rotation project(const Eigen::Matrix3d& mat);
  static Rotation from_point(const Point& p);

  const Eigen::Matrix3d& matrix() const { return mat_; }
  Point to_point() const;

  Rotation inverse() const;
  Rotation orthonormalized() const { return project(mat_); }
  /// Composition; no re-orthonormalization (see orthonormalized()).
  Rotation operator*(const Rotation& rhs) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return mat_ * v; }

  /// max |RᵀR − I| and |det R − 1|.
  double orthogonality_error() const;

 private:
  struct Unchecked {};
  Rotation(const Eigen::Matrix3d& mat, Unchecked) : mat_(mat) {}

  Eigen::Matrix3d mat_;
};

/// Rodrigues' formula for exp(u^∧); second-order series below |u| = 1e-8.
Rotation so3_exp(const Eigen::Vector3d& u);

/// Inverse of so3_exp with |result| equal to the rotation angle.
/// Throws ChartDomainError when the angle is within kSo3CutLocusMargin of π.
Eigen::Vector3d so3_log(const Rotation& r);

/// Rotation angle in [0, π]; defined everywhere, unlike so3_log.
double rotation_angle(const Rotation& r);

/// Parallel transport for the Cartan-Schouten 0-connection along
/// ξ·exp(t μ^∧), in body-frame coordinates: the matrix exp(−μ^∧/2).
TransportMatrix so3_transport(const Rotation& xi, const Eigen::Vector3d& mu);

/// SO(3) with body-frame normal coordinates ξ ⊞ u = ξ·exp(u^∧) and the
/// Cartan-Schouten 0-connection, ∇_X Y = ½[X, Y] on left-invariant fields.
/// The transport state is the body-frame coordinate vector itself, so
/// transport_rate is −½ velocity × w.
class SO3Manifold final : public ChartedManifold {
 public:
  std::string name() const override { return "SO(3)"; }
  int dim() const override { return 3; }
  int ambient_size() const override { return 9; }
  double injectivity_radius() const override { return std::numbers::pi; }
  void validate(const Point& p) const override;

  int transport_state_size() const override { return 3; }
  Eigen::VectorXd lift(const Point&, const Eigen::VectorXd& v) const override { return v; }
  Eigen::VectorXd lower(const Point&, const Eigen::VectorXd& w) const override { return w; }
  Eigen::VectorXd transport_rate(const Point& p, const Eigen::VectorXd& velocity,
                                 const Eigen::VectorXd& w) const override;

 protected:
  Point do_boxplus(const Point& xi, const Eigen::VectorXd& u) const override;
  Eigen::VectorXd do_boxminus(const Point& zeta, const Point& xi) const override;
  Eigen::MatrixXd do_transport(const Point& xi, const Eigen::VectorXd& mu) const override;
};

}  // namespace manifold_ekf
