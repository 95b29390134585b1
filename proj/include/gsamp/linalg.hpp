#pragma once

#include <Eigen/Dense>

namespace gsamp::linalg {

struct SymEig {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns aligned with values
};

/// Symmetric eigendecomposition by cyclic Jacobi sweeps.
///
/// The rotation order is fixed (row-major over the strict upper triangle), so
/// identical input produces bit-identical output. Convergence is declared when
/// the off-diagonal Frobenius mass drops below tol * ||A||_F; the sweep count
/// is hard-capped, and exceeding the cap raises numerical_error with the
/// residual in the message. Eigenvalues are sorted ascending (stable) and each
/// eigenvector is oriented so its first entry of magnitude > 1e-12 is positive.
SymEig jacobi_eigen(const Eigen::MatrixXd& a, int max_sweeps = 100, double tol = 1e-12);

/// Singular values of an arbitrary matrix, computed from the Gram matrix of
/// its smaller side with jacobi_eigen. Returns `count` values in ascending
/// order; when the matrix has fewer than `count` singular values the result is
/// zero-padded at the front (the convention used when ranking rank-deficient
/// row blocks). Values whose square falls below a relative tolerance are
/// clamped to exactly zero.
Eigen::VectorXd singular_values_padded(const Eigen::MatrixXd& m, int count);

} // namespace gsamp::linalg
