#pragma once

#include <Eigen/Core>
#include <functional>

#include "manifold_ekf/manifold.hpp"

namespace manifold_ekf {

/// P Σ Pᵀ: transport of a covariance viewed as a (2,0)-tensor.
/// Throws NotSPDError if Σ is not SPD or P has the wrong size.
Eigen::MatrixXd transport_covariance(const TransportMatrix& transport, const Eigen::MatrixXd& cov);

inline constexpr double kDefaultOdeStep = 1e-3;

/// Numerical parallel transport along γ(t) = ξ ⊞ tμ by fixed-step RK4
/// integration of the connection's transport equation, one basis vector per
/// column. The geodesic velocity at γ(t) is recovered from the reversed
/// geodesic, γ̇(t) = −(ξ ⊟ γ(t)) / t, so no closed-form transport is used.
TransportMatrix ode_transport_oracle(const ChartedManifold& manifold, const Point& xi,
                                     const Eigen::VectorXd& mu, double step = kDefaultOdeStep);

enum class DiffScheme { kForward, kCentral };

inline constexpr double kDefaultForwardStep = 1e-6;
inline constexpr double kDefaultCentralStep = 1e-5;

constexpr double default_step(DiffScheme scheme) {
  return scheme == DiffScheme::kForward ? kDefaultForwardStep : kDefaultCentralStep;
}

using PointMap = std::function<Point(const Point&)>;

/// Jacobian of f in normal coordinates: column i is
/// (f(ξ ⊞ h eᵢ) ⊟ f(ξ)) / h, or the symmetric central version.
Eigen::MatrixXd fd_jacobian(const ChartedManifold& domain, const ChartedManifold& codomain,
                            const PointMap& f, const Point& xi, double step,
                            DiffScheme scheme = DiffScheme::kCentral);

inline Eigen::MatrixXd fd_jacobian(const ChartedManifold& domain,
                                   const ChartedManifold& codomain, const PointMap& f,
                                   const Point& xi, DiffScheme scheme = DiffScheme::kCentral) {
  return fd_jacobian(domain, codomain, f, xi, default_step(scheme), scheme);
}

}  // namespace manifold_ekf
