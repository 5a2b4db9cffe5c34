#include "manifold_ekf/geometry.hpp"

#include <cmath>
#include <string>

#include "manifold_ekf/errors.hpp"
#include "manifold_ekf/linalg.hpp"

namespace manifold_ekf {

Eigen::MatrixXd transport_covariance(const TransportMatrix& transport, const Eigen::MatrixXd& cov) {
  require_spd(cov, "transported covariance");
  if (transport.mat.cols() != cov.rows()) {
    throw DimensionError("transport_covariance: transport has " +
                         std::to_string(transport.mat.cols()) + " columns, covariance is " +
                         std::to_string(cov.rows()) + "x" + std::to_string(cov.cols()));
  }
  return symmetrize(transport.mat * cov * transport.mat.transpose());
}

namespace {

struct CurveSample {
  Point point;
  Eigen::VectorXd velocity;
};

class GeodesicSampler {
 public:
  GeodesicSampler(const ChartedManifold& m, const Point& xi, const Eigen::VectorXd& mu)
      : m_(m), xi_(xi), mu_(mu) {}

  CurveSample at(double t) const {
    if (t == 0.0) return {xi_, mu_};
    Point p = m_.boxplus(xi_, t * mu_);
    Eigen::VectorXd v = -m_.boxminus(xi_, p) / t;
    return {std::move(p), std::move(v)};
  }

 private:
  const ChartedManifold& m_;
  const Point& xi_;
  const Eigen::VectorXd& mu_;
};

Eigen::MatrixXd rate(const ChartedManifold& m, const CurveSample& s, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd out(w.rows(), w.cols());
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    out.col(c) = m.transport_rate(s.point, s.velocity, w.col(c));
  }
  return out;
}

}  // namespace

TransportMatrix ode_transport_oracle(const ChartedManifold& manifold, const Point& xi,
                                     const Eigen::VectorXd& mu, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw StepSizeError("ode_transport_oracle: step must be positive, got " + std::to_string(step));
  }
  manifold.validate(xi);
  const int m = manifold.dim();
  if (mu.size() != m) throw DimensionError("ode_transport_oracle: velocity size mismatch");
  const Point end = manifold.boxplus(xi, mu);

  Eigen::MatrixXd w(manifold.transport_state_size(), m);
  for (int i = 0; i < m; ++i) {
    w.col(i) = manifold.lift(xi, Eigen::VectorXd::Unit(m, i));
  }

  const GeodesicSampler curve(manifold, xi, mu);
  const auto n = static_cast<long>(std::ceil(1.0 / step - 1e-9));
  const double h = 1.0 / static_cast<double>(n);
  CurveSample s0 = curve.at(0.0);
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    const CurveSample s_mid = curve.at(t + 0.5 * h);
    const CurveSample s1 = curve.at(k + 1 == n ? 1.0 : t + h);
    const Eigen::MatrixXd k1 = rate(manifold, s0, w);
    const Eigen::MatrixXd k2 = rate(manifold, s_mid, w + 0.5 * h * k1);
    const Eigen::MatrixXd k3 = rate(manifold, s_mid, w + 0.5 * h * k2);
    const Eigen::MatrixXd k4 = rate(manifold, s1, w + h * k3);
    w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s0 = s1;
  }

  Eigen::MatrixXd mat(m, m);
  for (int i = 0; i < m; ++i) mat.col(i) = manifold.lower(end, w.col(i));
  return TransportMatrix{std::move(mat), xi, end};
}

Eigen::MatrixXd fd_jacobian(const ChartedManifold& domain, const ChartedManifold& codomain,
                            const PointMap& f, const Point& xi, double step, DiffScheme scheme) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw StepSizeError("fd_jacobian: step must be positive, got " + std::to_string(step));
  }
  const Point f0 = f(xi);
  const int m = domain.dim();
  Eigen::MatrixXd jac(codomain.dim(), m);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(m, i) * step;
    const Eigen::VectorXd plus = codomain.boxminus(f(domain.boxplus(xi, e)), f0);
    if (scheme == DiffScheme::kForward) {
      jac.col(i) = plus / step;
    } else {
      const Eigen::VectorXd minus = codomain.boxminus(f(domain.boxplus(xi, -e)), f0);
      jac.col(i) = (plus - minus) / (2.0 * step);
    }
  }
  return jac;
}

}  // namespace manifold_ekf
