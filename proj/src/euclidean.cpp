#include "manifold_ekf/euclidean.hpp"

#include <stdexcept>
#include <string>

#include "manifold_ekf/errors.hpp"

namespace manifold_ekf {

EuclideanSpace::EuclideanSpace(int n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("EuclideanSpace: dimension must be positive");
}

std::string EuclideanSpace::name() const { return "R^" + std::to_string(n_); }

void EuclideanSpace::validate(const Point& p) const {
  if (p.size() != n_) {
    throw DimensionError(name() + ": point has " + std::to_string(p.size()) + " coordinates");
  }
  if (!p.coords().allFinite()) throw std::invalid_argument(name() + ": non-finite point");
}

Point EuclideanSpace::do_boxplus(const Point& xi, const Eigen::VectorXd& u) const {
  return Point(xi.coords() + u);
}

Eigen::VectorXd EuclideanSpace::do_boxminus(const Point& zeta, const Point& xi) const {
  return zeta.coords() - xi.coords();
}

Eigen::MatrixXd EuclideanSpace::do_transport(const Point&, const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Identity(n_, n_);
}

}  // namespace manifold_ekf
