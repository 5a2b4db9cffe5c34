#pragma once

#include "manifold_ekf/manifold.hpp"

namespace manifold_ekf {

/// ℝⁿ with the flat connection: ⊞ is addition, transport is the identity.
class EuclideanSpace final : public ChartedManifold {
 public:
  explicit EuclideanSpace(int n);

  std::string name() const override;
  int dim() const override { return n_; }
  int ambient_size() const override { return n_; }
  double injectivity_radius() const override { return kInfiniteRadius; }
  void validate(const Point& p) const override;

  int transport_state_size() const override { return n_; }
  Eigen::VectorXd lift(const Point&, const Eigen::VectorXd& v) const override { return v; }
  Eigen::VectorXd lower(const Point&, const Eigen::VectorXd& w) const override { return w; }
  Eigen::VectorXd transport_rate(const Point&, const Eigen::VectorXd&,
                                 const Eigen::VectorXd& w) const override {
    return Eigen::VectorXd::Zero(w.size());
  }

 protected:
  Point do_boxplus(const Point& xi, const Eigen::VectorXd& u) const override;
  Eigen::VectorXd do_boxminus(const Point& zeta, const Point& xi) const override;
  Eigen::MatrixXd do_transport(const Point& xi, const Eigen::VectorXd& mu) const override;

 private:
  int n_;
};

}  // namespace manifold_ekf
