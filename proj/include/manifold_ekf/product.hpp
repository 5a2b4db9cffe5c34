#pragma once

#include <vector>

#include "manifold_ekf/manifold.hpp"

namespace manifold_ekf {

/// Finite product M₁ × … × Mₖ with the product connection. Points,
/// tangent vectors and transport states are concatenations in factor order;
/// transports are block-diagonal.
///
/// The chart domain is the product of the factor domains, so a tangent
/// vector is accepted iff every block is inside its factor's radius.
/// injectivity_radius() reports the smallest factor radius.
class ProductManifold final : public ChartedManifold {
 public:
  explicit ProductManifold(std::vector<ManifoldPtr> factors);

  std::string name() const override;
  int dim() const override { return dim_; }
  int ambient_size() const override { return ambient_; }
  double injectivity_radius() const override { return radius_; }
  void validate(const Point& p) const override;
  bool in_chart_domain(const Eigen::VectorXd& u) const override;

  int transport_state_size() const override { return state_; }
  Eigen::VectorXd lift(const Point& p, const Eigen::VectorXd& v) const override;
  Eigen::VectorXd lower(const Point& p, const Eigen::VectorXd& w) const override;
  Eigen::VectorXd transport_rate(const Point& p, const Eigen::VectorXd& velocity,
                                 const Eigen::VectorXd& w) const override;

  const std::vector<ManifoldPtr>& factors() const { return factors_; }
  std::vector<Point> split(const Point& p) const;
  Point join(const std::vector<Point>& parts) const;
  /// Offset of factor i's block within tangent vectors.
  int tangent_offset(std::size_t i) const { return tangent_offsets_[i]; }

 protected:
  Point do_boxplus(const Point& xi, const Eigen::VectorXd& u) const override;
  Eigen::VectorXd do_boxminus(const Point& zeta, const Point& xi) const override;
  Eigen::MatrixXd do_transport(const Point& xi, const Eigen::VectorXd& mu) const override;

 private:
  std::vector<ManifoldPtr> factors_;
  std::vector<int> tangent_offsets_;
  std::vector<int> ambient_offsets_;
  std::vector<int> state_offsets_;
  int dim_ = 0;
  int ambient_ = 0;
  int state_ = 0;
  double radius_ = kInfiniteRadius;
};

/// Convenience factory for product_manifold({...}).
ManifoldPtr product_manifold(std::vector<ManifoldPtr> factors);

}  // namespace manifold_ekf
