#include "gsamp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gsamp/errors.hpp"
#include "gsamp/linalg.hpp"

namespace gsamp {
namespace {

constexpr double kRepeatedEigGap = 1e-9;

/// Extend passband length l so it never splits an eigenvalue cluster whose
/// internal gaps are <= 1e-9. Logs when widening occurs.
int widen_over_repeats(const Eigen::VectorXd& values, int l, const char* what) {
    const int n = static_cast<int>(values.size());
    int widened = l;
    while (widened < n && values(widened) - values(widened - 1) <= kRepeatedEigGap) ++widened;
    if (widened != l) {
        std::ostringstream msg;
        msg << what << ": cutoff splits a repeated eigenvalue; widening passband from " << l
            << " to " << widened << " eigenvalues";
        log_warning(msg.str());
    }
    return widened;
}

SpectralFilter make_prefix_filter(double ratio, int n, int l) {
    SpectralFilter f;
    f.cutoff_ratio = ratio;
    f.response = Eigen::VectorXd::Zero(n);
    f.response.head(l).setOnes();
    return f;
}

Eigen::MatrixXd projector_from_prefix(const EigenBasis& basis, int l) {
    const Eigen::MatrixXd u = basis.eigenvectors.leftCols(l);
    return u * u.transpose();
}

} // namespace

SpectralFilter SpectralFilter::by_value(const EigenBasis& basis, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw validation_error("SpectralFilter: cutoff ratio must lie in (0, 1]");
    const int n = basis.n();
    const double threshold = ratio * basis.lambda_max();
    int l = 0;
    while (l < n && basis.eigenvalues(l) <= threshold) ++l;
    l = std::max(1, l);
    l = widen_over_repeats(basis.eigenvalues, l, "low-pass filter");
    return make_prefix_filter(ratio, n, l);
}

SpectralFilter SpectralFilter::by_count(const EigenBasis& basis, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw validation_error("SpectralFilter: cutoff ratio must lie in (0, 1]");
    const int n = basis.n();
    // Small negative guard so exact products like 0.4 * 5 do not round the
    // ceiling up through floating-point dust.
    int l = static_cast<int>(std::ceil(ratio * n - 1e-9));
    l = std::clamp(l, 1, n);
    l = widen_over_repeats(basis.eigenvalues, l, "low-pass filter");
    return make_prefix_filter(ratio, n, l);
}

EigenBasis eigendecompose(const Eigen::MatrixXd& laplacian) {
    if (laplacian.rows() != laplacian.cols())
        throw validation_error("eigendecompose: matrix must be square");
    const double asym = (laplacian - laplacian.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) {
        std::ostringstream msg;
        msg << "eigendecompose: matrix asymmetric (max |L - L^T| = " << asym << ")";
        throw validation_error(msg.str());
    }

    const linalg::SymEig eig = linalg::jacobi_eigen(laplacian, /*max_sweeps=*/100, /*tol=*/1e-12);
    EigenBasis basis{eig.values, eig.vectors};

    const Eigen::Index n = laplacian.rows();
    const double ortho_err =
        (basis.eigenvectors.transpose() * basis.eigenvectors - Eigen::MatrixXd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff();
    const double recon_err =
        (basis.eigenvectors * basis.eigenvalues.asDiagonal() * basis.eigenvectors.transpose() -
         laplacian)
            .cwiseAbs()
            .maxCoeff();
    const double recon_tol = 1e-8 * std::max(1.0, laplacian.cwiseAbs().maxCoeff());
    if (ortho_err > 1e-8 || recon_err > recon_tol) {
        std::ostringstream msg;
        msg << "eigendecompose: accuracy invariants violated (orthonormality " << ortho_err
            << ", reconstruction " << recon_err << ")";
        throw numerical_error(msg.str());
    }
    return basis;
}

FilterOperator ideal_lowpass_operator(const EigenBasis& basis, double cutoff_ratio) {
    const SpectralFilter f = SpectralFilter::by_value(basis, cutoff_ratio);
    FilterOperator op;
    op.kind = FilterOperator::Kind::Exact;
    op.passband = f.passband_size();
    op.matrix = projector_from_prefix(basis, op.passband);
    return op;
}

FilterOperator exact_operator_by_count(const EigenBasis& basis, int passband) {
    if (passband < 1 || passband > basis.n())
        throw validation_error("exact_operator_by_count: passband out of range");
    const int l = widen_over_repeats(basis.eigenvalues, passband, "low-pass filter");
    FilterOperator op;
    op.kind = FilterOperator::Kind::Exact;
    op.passband = l;
    op.matrix = projector_from_prefix(basis, l);
    return op;
}

FilterOperator chebyshev_operator(const Eigen::MatrixXd& laplacian, double cutoff_ratio,
                                  int order, std::optional<double> lambda_max) {
    if (!(cutoff_ratio > 0.0 && cutoff_ratio <= 1.0))
        throw validation_error("chebyshev_operator: cutoff ratio must lie in (0, 1]");
    if (order < 1) throw validation_error("chebyshev_operator: order must be >= 1");

    double lmax = 0.0;
    if (lambda_max.has_value()) {
        lmax = *lambda_max;
    } else {
        lmax = eigendecompose(laplacian).lambda_max();
    }
    if (!(lmax > 0.0))
        throw validation_error("chebyshev_operator: lambda_max must be positive");

    // Least-squares fit of the 0/1 response at 256 Chebyshev points of
    // [0, lambda_max]. At these nodes the discrete Chebyshev orthogonality
    // makes the fit the truncated expansion with the classic coefficients.
    constexpr int kSamples = 256;
    const double threshold = cutoff_ratio * lmax;
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(order + 1);
    for (int j = 0; j < kSamples; ++j) {
        const double angle = M_PI * (j + 0.5) / kSamples;
        const double x = std::cos(angle);                 // in (-1, 1)
        const double lambda = 0.5 * lmax * (x + 1.0);     // mapped to (0, lambda_max)
        const double r = (lambda <= threshold) ? 1.0 : 0.0;
        if (r == 0.0) continue;
        for (int k = 0; k <= order; ++k) coeff(k) += r * std::cos(k * angle);
    }
    coeff(0) *= 1.0 / kSamples;
    coeff.tail(order) *= 2.0 / kSamples;

    const Eigen::Index n = laplacian.rows();
    const Eigen::MatrixXd scaled =
        (2.0 / lmax) * laplacian - Eigen::MatrixXd::Identity(n, n);

    // Three-term recurrence T_{k+1} = 2 L~ T_k - T_{k-1}.
    Eigen::MatrixXd t_prev = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd t_curr = scaled;
    Eigen::MatrixXd acc = coeff(0) * t_prev;
    if (order >= 1) acc += coeff(1) * t_curr;
    for (int k = 2; k <= order; ++k) {
        Eigen::MatrixXd t_next = 2.0 * scaled * t_curr - t_prev;
        acc += coeff(k) * t_next;
        t_prev = std::move(t_curr);
        t_curr = std::move(t_next);
    }

    FilterOperator op;
    op.kind = FilterOperator::Kind::Chebyshev;
    op.order = order;
    op.matrix = std::move(acc);
    return op;
}

LocalSmootherTable precompute_local_smoothers(const Graph& g, double cutoff_ratio_local) {
    if (!(cutoff_ratio_local > 0.0 && cutoff_ratio_local <= 1.0))
        throw validation_error("precompute_local_smoothers: cutoff ratio must lie in (0, 1]");

    LocalSmootherTable table;
    table.reserve(static_cast<std::size_t>(g.n_nodes()));
    for (int v = 0; v < g.n_nodes(); ++v) {
        const Neighborhood nb = induced_neighborhood(g, v);
        const int m = static_cast<int>(nb.members.size());

        Eigen::MatrixXd local_lap = Eigen::MatrixXd::Zero(m, m);
        auto position = [&nb](int node) {
            return static_cast<int>(std::find(nb.members.begin(), nb.members.end(), node) -
                                    nb.members.begin());
        };
        for (const auto& [a, b] : nb.local_edges) {
            const int pa = position(a);
            const int pb = position(b);
            local_lap(pa, pa) += 1.0;
            local_lap(pb, pb) += 1.0;
            local_lap(pa, pb) -= 1.0;
            local_lap(pb, pa) -= 1.0;
        }

        EigenBasis basis;
        try {
            basis = eigendecompose(local_lap);
        } catch (const numerical_error& e) {
            std::ostringstream msg;
            msg << "precompute_local_smoothers: node " << v << ": " << e.what();
            throw numerical_error(msg.str());
        }

        int l = static_cast<int>(std::ceil(cutoff_ratio_local * m - 1e-9));
        l = std::clamp(l, 1, m);
        l = widen_over_repeats(basis.eigenvalues, l, "local smoother");

        LocalSmoother sm;
        sm.member_order = nb.members;
        // Row of U_l U_l^T for the center (member position 0).
        sm.theta_row = basis.eigenvectors.leftCols(l) *
                       basis.eigenvectors.row(0).head(l).transpose();
        table.push_back(std::move(sm));
    }
    return table;
}

} // namespace gsamp
