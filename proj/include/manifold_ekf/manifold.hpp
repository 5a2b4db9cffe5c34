#pragma once

#include <Eigen/Core>
#include <limits>
#include <memory>
#include <string>

namespace manifold_ekf {

/// A point on some ChartedManifold, stored by its ambient/embedding
/// coordinates. Only the manifold that produced it knows how to interpret
/// them (rotation matrix entries, unit vector, concatenated factors...).
class Point {
 public:
  Point() = default;
  explicit Point(Eigen::VectorXd coords) : coords_(std::move(coords)) {}

  const Eigen::VectorXd& coords() const { return coords_; }
  Eigen::Index size() const { return coords_.size(); }

  friend bool operator==(const Point& a, const Point& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

 private:
  Eigen::VectorXd coords_;
};

/// Coordinate expression of parallel transport T_from M -> T_to M, written
/// in the chart tangent bases at both ends.
struct TransportMatrix {
  Eigen::MatrixXd mat;
  Point from;
  Point to;
};

/// A smooth manifold with an affine connection, presented through normal
/// coordinates. Tangent vectors are always written in a deterministic
/// orthonormal basis chosen by the implementation at each point.
///
/// The public entry points validate sizes, finiteness and the chart domain,
/// then dispatch to the protected `do_*` hooks.
///
/// Besides the closed forms, each implementation exposes the connection in a
/// "transport state" representation (lift / lower / transport_rate). Along a
/// curve γ the transported vector's state w obeys ẇ = transport_rate(γ, γ̇, w).
/// That is all the ODE oracle needs, and it is kept independent of the
/// closed-form transport.
class ChartedManifold {
 public:
  virtual ~ChartedManifold() = default;

  virtual std::string name() const = 0;
  /// Intrinsic dimension m.
  virtual int dim() const = 0;
  /// Length of Point::coords for points of this manifold.
  virtual int ambient_size() const = 0;
  /// Radius of the normal-coordinate chart; +inf when global.
  virtual double injectivity_radius() const = 0;

  /// Throws DimensionError / std::invalid_argument if p is not a valid point.
  virtual void validate(const Point& p) const = 0;

  /// True iff u lies strictly inside the chart domain at any point.
  virtual bool in_chart_domain(const Eigen::VectorXd& u) const;

  /// Geodesic endpoint ξ ⊞ u. Throws ChartDomainError outside the chart.
  Point boxplus(const Point& xi, const Eigen::VectorXd& u) const;
  /// ζ ⊟ ξ: normal coordinates of ζ centred at ξ.
  Eigen::VectorXd boxminus(const Point& zeta, const Point& xi) const;
  /// Parallel transport along γ(t) = ξ ⊞ tμ, t ∈ [0, 1].
  TransportMatrix transport_along_geodesic(const Point& xi, const Eigen::VectorXd& mu) const;

  virtual int transport_state_size() const = 0;
  virtual Eigen::VectorXd lift(const Point& p, const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd lower(const Point& p, const Eigen::VectorXd& w) const = 0;
  /// ẇ for a vector being parallel-transported through p with velocity
  /// `velocity` (tangent coordinates at p).
  virtual Eigen::VectorXd transport_rate(const Point& p, const Eigen::VectorXd& velocity,
                                         const Eigen::VectorXd& w) const = 0;

 protected:
  virtual Point do_boxplus(const Point& xi, const Eigen::VectorXd& u) const = 0;
  virtual Eigen::VectorXd do_boxminus(const Point& zeta, const Point& xi) const = 0;
  virtual Eigen::MatrixXd do_transport(const Point& xi, const Eigen::VectorXd& mu) const = 0;

  void check_tangent(const Eigen::VectorXd& u, const char* what) const;
};

using ManifoldPtr = std::shared_ptr<const ChartedManifold>;

inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

}  // namespace manifold_ekf
