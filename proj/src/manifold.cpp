#include "manifold_ekf/manifold.hpp"

#include <sstream>

#include "manifold_ekf/errors.hpp"

namespace manifold_ekf {

bool ChartedManifold::in_chart_domain(const Eigen::VectorXd& u) const {
  return u.norm() < injectivity_radius();
}

void ChartedManifold::check_tangent(const Eigen::VectorXd& u, const char* what) const {
  if (u.size() != dim()) {
    std::ostringstream os;
    os << name() << ": " << what << " has size " << u.size() << ", expected " << dim();
    throw DimensionError(os.str());
  }
  if (!u.allFinite()) {
    throw std::invalid_argument(name() + ": " + what + " has non-finite entries");
  }
  if (!in_chart_domain(u)) {
    std::ostringstream os;
    os << name() << ": " << what << " of norm " << u.norm()
       << " is outside the chart domain (injectivity radius " << injectivity_radius() << ")";
    throw ChartDomainError(os.str());
  }
}

Point ChartedManifold::boxplus(const Point& xi, const Eigen::VectorXd& u) const {
  validate(xi);
  check_tangent(u, "boxplus increment");
  return do_boxplus(xi, u);
}

Eigen::VectorXd ChartedManifold::boxminus(const Point& zeta, const Point& xi) const {
  validate(zeta);
  validate(xi);
  return do_boxminus(zeta, xi);
}

TransportMatrix ChartedManifold::transport_along_geodesic(const Point& xi,
                                                          const Eigen::VectorXd& mu) const {
  validate(xi);
  check_tangent(mu, "geodesic velocity");
  return TransportMatrix{do_transport(xi, mu), xi, do_boxplus(xi, mu)};
}

}  // namespace manifold_ekf
