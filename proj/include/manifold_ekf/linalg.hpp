#pragma once

#include <Eigen/Core>

namespace manifold_ekf {

/// Smallest LDLT pivot accepted when checking positive-definiteness.
inline constexpr double kSpdPivotTolerance = 1e-12;

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// (M + Mᵀ) / 2.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

bool is_symmetric(const Eigen::MatrixXd& m, double tol);

/// Symmetric factorization test: true iff m is square, symmetric to 1e-9
/// relative, and every LDLT pivot exceeds kSpdPivotTolerance.
bool is_spd(const Eigen::MatrixXd& m);

/// Positive semi-definite up to `tol` on the smallest eigenvalue.
bool is_psd(const Eigen::MatrixXd& m, double tol = 1e-12);

/// Throws NotSPDError naming `what` if !is_spd(m).
void require_spd(const Eigen::MatrixXd& m, const char* what);

/// Clamps eigenvalues of a symmetric matrix from below.
Eigen::MatrixXd floor_eigenvalues(const Eigen::MatrixXd& m, double floor);

/// Block-diagonal concatenation of two square matrices.
Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace manifold_ekf
