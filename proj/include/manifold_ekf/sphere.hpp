#pragma once

#include <Eigen/Core>
#include <numbers>

#include "manifold_ekf/manifold.hpp"

namespace manifold_ekf {

/// sphere_log refuses pairs with pᵀq ≤ −1 + kAntipodalMargin.
inline constexpr double kAntipodalMargin = 1e-9;

/// Point of S² ⊂ ℝ³; construction checks |v| = 1 to 1e-12.
class UnitVector {
 public:
  explicit UnitVector(const Eigen::Vector3d& v);

  static UnitVector normalized(const Eigen::Vector3d& v);
  static UnitVector from_point(const Point& p);

  const Eigen::Vector3d& vec() const { return v_; }
  Point to_point() const { return Point(Eigen::VectorXd(v_)); }

 private:
  Eigen::Vector3d v_;
};

using SphereBasis = Eigen::Matrix<double, 3, 2>;

/// Deterministic orthonormal basis of T_p S². The first vector is the
/// canonical axis least aligned with p (argmin |pᵢ|, lowest index on ties)
/// made orthogonal to p; the second is p × first.
SphereBasis sphere_basis(const UnitVector& p);

/// Bᵀ a: coordinates of the tangential part of an ambient vector.
Eigen::Vector2d project_to_tangent(const UnitVector& p, const Eigen::Vector3d& ambient);

/// Great-circle exponential. Throws ChartDomainError for |v| ≥ π.
UnitVector sphere_exp(const UnitVector& p, const Eigen::Vector2d& v);

/// q ⊟ p in the basis at p. Throws ChartDomainError for (near-)antipodal pairs.
Eigen::Vector2d sphere_log(const UnitVector& q, const UnitVector& p);

/// Levi-Civita transport along the great circle p ⊞ tv, in the bases at
/// both ends: a rotation about p × v by |v|.
TransportMatrix sphere_transport(const UnitVector& p, const Eigen::Vector2d& v);

/// S² with great-circle geodesics and the metric (symmetric-space) connection.
/// The transport state is the ambient 3-vector; along a curve p(t) it obeys
/// ẇ = −(ṗ · w) p.
class SphereManifold final : public ChartedManifold {
 public:
  std::string name() const override { return "S^2"; }
  int dim() const override { return 2; }
  int ambient_size() const override { return 3; }
  double injectivity_radius() const override { return std::numbers::pi; }
  void validate(const Point& p) const override;

  int transport_state_size() const override { return 3; }
  Eigen::VectorXd lift(const Point& p, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd lower(const Point& p, const Eigen::VectorXd& w) const override;
  Eigen::VectorXd transport_rate(const Point& p, const Eigen::VectorXd& velocity,
                                 const Eigen::VectorXd& w) const override;

 protected:
  Point do_boxplus(const Point& xi, const Eigen::VectorXd& u) const override;
  Eigen::VectorXd do_boxminus(const Point& zeta, const Point& xi) const override;
  Eigen::MatrixXd do_transport(const Point& xi, const Eigen::VectorXd& mu) const override;
};

}  // namespace manifold_ekf
