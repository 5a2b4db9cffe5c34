#include "manifold_ekf/sphere.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "manifold_ekf/errors.hpp"

namespace manifold_ekf {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr double kSmallAngle = 1e-8;

void check_sphere_step(const Eigen::Vector2d& v) {
  if (!v.allFinite()) throw std::invalid_argument("S^2: non-finite tangent vector");
  if (v.norm() >= std::numbers::pi) {
    std::ostringstream os;
    os << "S^2: tangent vector of norm " << v.norm() << " reaches the cut locus";
    throw ChartDomainError(os.str());
  }
}

}  // namespace

UnitVector::UnitVector(const Eigen::Vector3d& v) : v_(v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kUnitTolerance) {
    std::ostringstream os;
    os << "UnitVector: norm " << v.norm() << " is not 1";
    throw std::invalid_argument(os.str());
  }
}

UnitVector UnitVector::normalized(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("UnitVector: cannot normalize a zero or non-finite vector");
  }
  return UnitVector(v / n);
}

UnitVector UnitVector::from_point(const Point& p) {
  if (p.size() != 3) throw DimensionError("UnitVector: point must have 3 coordinates");
  return UnitVector(Eigen::Vector3d(p.coords()));
}

SphereBasis sphere_basis(const UnitVector& p) {
  const Eigen::Vector3d& x = p.vec();
  int axis = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(x[i]) < std::abs(x[axis])) axis = i;
  }
  const Eigen::Vector3d a = Eigen::Vector3d::Unit(axis);
  const Eigen::Vector3d e1 = (a - a.dot(x) * x).normalized();
  SphereBasis b;
  b.col(0) = e1;
  b.col(1) = x.cross(e1);
  return b;
}

Eigen::Vector2d project_to_tangent(const UnitVector& p, const Eigen::Vector3d& ambient) {
  return sphere_basis(p).transpose() * ambient;
}

UnitVector sphere_exp(const UnitVector& p, const Eigen::Vector2d& v) {
  check_sphere_step(v);
  const Eigen::Vector3d w = sphere_basis(p) * v;
  const double theta = w.norm();
  if (theta == 0.0) return p;
  if (theta < 1e-12) return UnitVector::normalized(p.vec() + w);
  return UnitVector::normalized(std::cos(theta) * p.vec() + (std::sin(theta) / theta) * w);
}

Eigen::Vector2d sphere_log(const UnitVector& q, const UnitVector& p) {
  const double c = p.vec().dot(q.vec());
  if (c <= -1.0 + kAntipodalMargin) {
    throw ChartDomainError("sphere_log: points are antipodal");
  }
  const double s = p.vec().cross(q.vec()).norm();
  const double theta = std::atan2(s, c);
  const Eigen::Vector3d tangential = q.vec() - c * p.vec();
  const double scale = theta < kSmallAngle ? 1.0 + theta * theta / 6.0 : theta / s;
  return sphere_basis(p).transpose() * (scale * tangential);
}

TransportMatrix sphere_transport(const UnitVector& p, const Eigen::Vector2d& v) {
  static const SphereManifold sphere;
  return sphere.transport_along_geodesic(p.to_point(), v);
}

void SphereManifold::validate(const Point& p) const { (void)UnitVector::from_point(p); }

Point SphereManifold::do_boxplus(const Point& xi, const Eigen::VectorXd& u) const {
  return sphere_exp(UnitVector::from_point(xi), Eigen::Vector2d(u)).to_point();
}

Eigen::VectorXd SphereManifold::do_boxminus(const Point& zeta, const Point& xi) const {
  return sphere_log(UnitVector::from_point(zeta), UnitVector::from_point(xi));
}

Eigen::MatrixXd SphereManifold::do_transport(const Point& xi, const Eigen::VectorXd& mu) const {
  const UnitVector p = UnitVector::from_point(xi);
  const Eigen::Vector2d v = mu;
  if (v.isZero(0.0)) return Eigen::Matrix2d::Identity();
  const UnitVector q = sphere_exp(p, v);
  const SphereBasis bp = sphere_basis(p);
  const SphereBasis bq = sphere_basis(q);
  const Eigen::Vector3d w = bp * v;
  const double theta = w.norm();
  if (theta < 1e-12) return bq.transpose() * bp;
  const Eigen::Vector3d axis = p.vec().cross(w) / theta;
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(theta, axis).toRotationMatrix();
  return bq.transpose() * rot * bp;
}

Eigen::VectorXd SphereManifold::lift(const Point& p, const Eigen::VectorXd& v) const {
  return sphere_basis(UnitVector::from_point(p)) * v;
}

Eigen::VectorXd SphereManifold::lower(const Point& p, const Eigen::VectorXd& w) const {
  return sphere_basis(UnitVector::from_point(p)).transpose() * w;
}

Eigen::VectorXd SphereManifold::transport_rate(const Point& p, const Eigen::VectorXd& velocity,
                                               const Eigen::VectorXd& w) const {
  const UnitVector x = UnitVector::from_point(p);
  const Eigen::Vector3d pdot = sphere_basis(x) * velocity;
  return -pdot.dot(w) * x.vec();
}

}  // namespace manifold_ekf
