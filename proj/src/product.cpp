#include "manifold_ekf/product.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "manifold_ekf/errors.hpp"

namespace manifold_ekf {

ProductManifold::ProductManifold(std::vector<ManifoldPtr> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw std::invalid_argument("ProductManifold: no factors");
  for (const auto& f : factors_) {
    if (!f) throw std::invalid_argument("ProductManifold: null factor");
    tangent_offsets_.push_back(dim_);
    ambient_offsets_.push_back(ambient_);
    state_offsets_.push_back(state_);
    dim_ += f->dim();
    ambient_ += f->ambient_size();
    state_ += f->transport_state_size();
    radius_ = std::min(radius_, f->injectivity_radius());
  }
}

std::string ProductManifold::name() const {
  std::string out;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i > 0) out += " x ";
    out += factors_[i]->name();
  }
  return out;
}

void ProductManifold::validate(const Point& p) const {
  if (p.size() != ambient_) {
    throw DimensionError(name() + ": point has " + std::to_string(p.size()) +
                         " coordinates, expected " + std::to_string(ambient_));
  }
  const auto parts = split(p);
  for (std::size_t i = 0; i < factors_.size(); ++i) factors_[i]->validate(parts[i]);
}

bool ProductManifold::in_chart_domain(const Eigen::VectorXd& u) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (!factors_[i]->in_chart_domain(u.segment(tangent_offsets_[i], factors_[i]->dim()))) {
      return false;
    }
  }
  return true;
}

std::vector<Point> ProductManifold::split(const Point& p) const {
  if (p.size() != ambient_) throw DimensionError(name() + ": point size mismatch");
  std::vector<Point> parts;
  parts.reserve(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    parts.emplace_back(p.coords().segment(ambient_offsets_[i], factors_[i]->ambient_size()));
  }
  return parts;
}

Point ProductManifold::join(const std::vector<Point>& parts) const {
  if (parts.size() != factors_.size()) throw DimensionError(name() + ": wrong number of parts");
  Eigen::VectorXd coords(ambient_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (parts[i].size() != factors_[i]->ambient_size()) {
      throw DimensionError(name() + ": part " + std::to_string(i) + " has the wrong size");
    }
    coords.segment(ambient_offsets_[i], parts[i].size()) = parts[i].coords();
  }
  return Point(std::move(coords));
}

Point ProductManifold::do_boxplus(const Point& xi, const Eigen::VectorXd& u) const {
  const auto parts = split(xi);
  std::vector<Point> out;
  out.reserve(parts.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    out.push_back(
        factors_[i]->boxplus(parts[i], u.segment(tangent_offsets_[i], factors_[i]->dim())));
  }
  return join(out);
}

Eigen::VectorXd ProductManifold::do_boxminus(const Point& zeta, const Point& xi) const {
  const auto z = split(zeta);
  const auto x = split(xi);
  Eigen::VectorXd out(dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    out.segment(tangent_offsets_[i], factors_[i]->dim()) = factors_[i]->boxminus(z[i], x[i]);
  }
  return out;
}

Eigen::MatrixXd ProductManifold::do_transport(const Point& xi, const Eigen::VectorXd& mu) const {
  const auto parts = split(xi);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int off = tangent_offsets_[i];
    const int d = factors_[i]->dim();
    out.block(off, off, d, d) =
        factors_[i]->transport_along_geodesic(parts[i], mu.segment(off, d)).mat;
  }
  return out;
}

Eigen::VectorXd ProductManifold::lift(const Point& p, const Eigen::VectorXd& v) const {
  const auto parts = split(p);
  Eigen::VectorXd out(state_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    out.segment(state_offsets_[i], factors_[i]->transport_state_size()) =
        factors_[i]->lift(parts[i], v.segment(tangent_offsets_[i], factors_[i]->dim()));
  }
  return out;
}

Eigen::VectorXd ProductManifold::lower(const Point& p, const Eigen::VectorXd& w) const {
  const auto parts = split(p);
  Eigen::VectorXd out(dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    out.segment(tangent_offsets_[i], factors_[i]->dim()) = factors_[i]->lower(
        parts[i], w.segment(state_offsets_[i], factors_[i]->transport_state_size()));
  }
  return out;
}

Eigen::VectorXd ProductManifold::transport_rate(const Point& p, const Eigen::VectorXd& velocity,
                                                const Eigen::VectorXd& w) const {
  const auto parts = split(p);
  Eigen::VectorXd out(state_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int s = factors_[i]->transport_state_size();
    out.segment(state_offsets_[i], s) = factors_[i]->transport_rate(
        parts[i], velocity.segment(tangent_offsets_[i], factors_[i]->dim()),
        w.segment(state_offsets_[i], s));
  }
  return out;
}

ManifoldPtr product_manifold(std::vector<ManifoldPtr> factors) {
  return std::make_shared<const ProductManifold>(std::move(factors));
}

}  // namespace manifold_ekf
