#include "manifold_ekf/so3.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "manifold_ekf/errors.hpp"
#include "manifold_ekf/linalg.hpp"

namespace manifold_ekf {

namespace {

constexpr double kRotationTolerance = 1e-9;
constexpr double kSmallAngle = 1e-8;

Eigen::Vector3d vee_of_skew_part(const Eigen::Matrix3d& m) {
  return 0.5 * Eigen::Vector3d(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

}  // namespace

Rotation::Rotation(const Eigen::Matrix3d& mat) : mat_(mat) {
  if (!mat.allFinite()) throw std::invalid_argument("Rotation: non-finite matrix");
  const double err = orthogonality_error();
  if (err > kRotationTolerance) {
    std::ostringstream os;
    os << "Rotation: matrix is not in SO(3) (error " << err << ")";
    throw std::invalid_argument(os.str());
  }
}

Rotation Rotation::project(const Eigen::Matrix3d& mat) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(mat, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return Rotation(u * v.transpose());
}

Rotation Rotation::from_point(const Point& p) {
  if (p.size() != 9) throw DimensionError("Rotation: point must have 9 coordinates");
  return Rotation(Eigen::Map<const Eigen::Matrix3d>(p.coords().data()));
}

Point Rotation::to_point() const {
  return Point(Eigen::Map<const Eigen::VectorXd>(mat_.data(), 9));
}

Rotation Rotation::inverse() const { return Rotation(mat_.transpose(), Unchecked{}); }

Rotation Rotation::operator*(const Rotation& rhs) const {
  return Rotation(mat_ * rhs.mat_, Unchecked{});
}

double Rotation::orthogonality_error() const {
  const double ortho = (mat_.transpose() * mat_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(mat_.determinant() - 1.0));
}

Rotation so3_exp(const Eigen::Vector3d& u) {
  const double theta = u.norm();
  const Eigen::Matrix3d k = skew(u);
  Eigen::Matrix3d r;
  if (theta < kSmallAngle) {
    r = Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
  } else {
    r = Eigen::Matrix3d::Identity() + (std::sin(theta) / theta) * k +
        ((1.0 - std::cos(theta)) / (theta * theta)) * k * k;
  }
  return Rotation(r);
}

double rotation_angle(const Rotation& r) {
  const Eigen::Matrix3d& m = r.matrix();
  const double s = vee_of_skew_part(m).norm();
  const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  return std::atan2(s, c);
}

Eigen::Vector3d so3_log(const Rotation& r) {
  const Eigen::Matrix3d& m = r.matrix();
  const Eigen::Vector3d axis_sin = vee_of_skew_part(m);
  const double s = axis_sin.norm();
  const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(s, c);
  if (theta > std::numbers::pi - kSo3CutLocusMargin) {
    std::ostringstream os;
    os << "so3_log: rotation angle " << theta << " is at the cut locus";
    throw ChartDomainError(os.str());
  }
  if (theta < kSmallAngle) {
    return (1.0 + theta * theta / 6.0) * axis_sin;
  }
  return (theta / s) * axis_sin;
}

TransportMatrix so3_transport(const Rotation& xi, const Eigen::Vector3d& mu) {
  static const SO3Manifold so3;
  return so3.transport_along_geodesic(xi.to_point(), mu);
}

void SO3Manifold::validate(const Point& p) const { (void)Rotation::from_point(p); }

Point SO3Manifold::do_boxplus(const Point& xi, const Eigen::VectorXd& u) const {
  const Eigen::Vector3d u3 = u;
  return (Rotation::from_point(xi) * so3_exp(u3)).to_point();
}

Eigen::VectorXd SO3Manifold::do_boxminus(const Point& zeta, const Point& xi) const {
  return so3_log(Rotation::from_point(xi).inverse() * Rotation::from_point(zeta));
}

Eigen::MatrixXd SO3Manifold::do_transport(const Point&, const Eigen::VectorXd& mu) const {
  const Eigen::Vector3d half = -0.5 * mu;
  return so3_exp(half).matrix();
}

Eigen::VectorXd SO3Manifold::transport_rate(const Point&, const Eigen::VectorXd& velocity,
                                            const Eigen::VectorXd& w) const {
  const Eigen::Vector3d v = velocity;
  const Eigen::Vector3d w3 = w;
  return -0.5 * v.cross(w3);
}

}  // namespace manifold_ekf
