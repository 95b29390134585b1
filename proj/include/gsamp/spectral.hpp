#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/graph.hpp"

namespace gsamp {

/// Full eigendecomposition of a graph Laplacian: eigenvalues ascending,
/// eigenvector columns aligned, U^T U = I to 1e-8.
struct EigenBasis {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    int n() const { return static_cast<int>(eigenvalues.size()); }
    double lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }
};

/// Ideal 0/1 low-pass response over an ascending spectrum: a prefix of ones.
struct SpectralFilter {
    double cutoff_ratio = 0.0;
    Eigen::VectorXd response;  // nonincreasing 0/1 vector, at least one 1

    int passband_size() const { return static_cast<int>(response.sum()); }

    /// Pass every eigenvalue lambda <= ratio * lambda_max. If the boundary
    /// would split a repeated eigenvalue (gap <= 1e-9) the passband widens to
    /// cover the full eigenspace and a warning is logged.
    static SpectralFilter by_value(const EigenBasis& basis, double ratio);

    /// Pass the first l = max(1, ceil(ratio * n)) eigenvalues, with the same
    /// repeated-eigenvalue widening rule.
    static SpectralFilter by_count(const EigenBasis& basis, double ratio);
};

/// A graph filter matrix. Exact operators are spectral projectors
/// (idempotent); Chebyshev operators are polynomial surrogates of a given
/// order that avoid full eigendecomposition at application time.
struct FilterOperator {
    enum class Kind { Exact, Chebyshev };

    Eigen::MatrixXd matrix;
    Kind kind = Kind::Exact;
    int order = 0;          // polynomial order, Chebyshev only
    int passband = 0;       // number of passed eigenvalues, Exact only
};

/// Per-node smoothing row: node v's row of U_v h(Lambda_v) U_v^T computed on
/// the eigenbasis of its 1-hop induced subgraph Laplacian.
struct LocalSmoother {
    Eigen::VectorXd theta_row;      // aligned with member_order
    std::vector<int> member_order;  // center first, then neighbors ascending
};

using LocalSmootherTable = std::vector<LocalSmoother>;

/// Eigendecompose a symmetric matrix (asymmetry beyond 1e-10 is rejected)
/// with cyclic Jacobi sweeps; deterministic for identical input. Raises
/// numerical_error if convergence or the reconstruction/orthonormality
/// invariants fail.
EigenBasis eigendecompose(const Eigen::MatrixXd& laplacian);

/// Exact ideal low-pass operator B = U diag(h) U^T with h passing all
/// eigenvalues lambda <= ratio * lambda_max, ratio in (0, 1].
FilterOperator ideal_lowpass_operator(const EigenBasis& basis, double cutoff_ratio);

/// Exact operator for an explicitly chosen passband size (same widening rule);
/// used to cross-check local smoothers against their global counterpart.
FilterOperator exact_operator_by_count(const EigenBasis& basis, int passband);

/// Chebyshev polynomial surrogate of the ideal low-pass response: the 0/1
/// response sampled at 256 Chebyshev points of [0, lambda_max] is fitted by
/// least squares with polynomials T_k(2 L / lambda_max - I), k = 0..order.
/// lambda_max is taken from the optional argument or computed by
/// eigendecomposition when absent.
FilterOperator chebyshev_operator(const Eigen::MatrixXd& laplacian, double cutoff_ratio,
                                  int order, std::optional<double> lambda_max = std::nullopt);

/// Build the smoothing row of every node from its 1-hop induced subgraph:
/// keep the first max(1, ceil(ratio_local * (d_v + 1))) local eigenvalues
/// (widened over repeated eigenvalues) and take the center's row of the
/// resulting projector.
LocalSmootherTable precompute_local_smoothers(const Graph& g, double cutoff_ratio_local);

} // namespace gsamp
