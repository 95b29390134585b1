#include "gsamp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "gsamp/errors.hpp"

namespace gsamp::linalg {
namespace {

double offdiag_norm(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    double sum = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
        for (Eigen::Index q = 0; q < n; ++q)
            if (p != q) sum += a(p, q) * a(p, q);
    return std::sqrt(sum);
}

} // namespace

SymEig jacobi_eigen(const Eigen::MatrixXd& a, int max_sweeps, double tol) {
    if (a.rows() != a.cols())
        throw validation_error("jacobi_eigen: matrix must be square");
    const Eigen::Index n = a.rows();

    Eigen::MatrixXd m = a;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double threshold = tol * std::max(a.norm(), 1e-300);

    double off = offdiag_norm(m);
    int sweep = 0;
    while (off > threshold && sweep < max_sweeps) {
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                m(p, p) -= t * apq;
                m(q, q) += t * apq;
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double mip = m(i, p);
                    const double miq = m(i, q);
                    m(i, p) = c * mip - s * miq;
                    m(i, q) = s * mip + c * miq;
                    m(p, i) = m(i, p);
                    m(q, i) = m(i, q);
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
        off = offdiag_norm(m);
        ++sweep;
    }

    if (off > threshold) {
        std::ostringstream msg;
        msg << "jacobi_eigen: no convergence after " << max_sweeps
            << " sweeps (off-diagonal residual " << off << ", threshold " << threshold << ")";
        throw numerical_error(msg.str());
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&m](Eigen::Index i, Eigen::Index j) { return m(i, i) < m(j, j); });

    SymEig out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = m(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double entry = out.vectors(i, k);
            if (std::abs(entry) > 1e-12) {
                if (entry < 0.0) out.vectors.col(k) = -out.vectors.col(k);
                break;
            }
        }
    }
    return out;
}

Eigen::VectorXd singular_values_padded(const Eigen::MatrixXd& m, int count) {
    if (count < 0) throw validation_error("singular_values_padded: count must be >= 0");
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    const Eigen::Index small = std::min(rows, cols);
    if (count < small)
        throw validation_error("singular_values_padded: count smaller than the number of singular values");

    Eigen::VectorXd out = Eigen::VectorXd::Zero(count);
    if (small == 0) return out;

    const Eigen::MatrixXd gram =
        (rows <= cols) ? Eigen::MatrixXd(m * m.transpose()) : Eigen::MatrixXd(m.transpose() * m);
    const SymEig eig = jacobi_eigen(gram);

    Eigen::VectorXd sv(small);
    for (Eigen::Index i = 0; i < small; ++i) sv(i) = std::sqrt(std::max(eig.values(i), 0.0));

    // Clamp numerically-zero values so rank-deficient blocks report
    // sigma_min = 0. The Gram route squares the conditioning: eigenvalue
    // noise of order eps * ||G|| turns into sigma noise of order
    // sqrt(eps) * sigma_max, so the clamp must sit above 1e-8 * sigma_max
    // to treat genuinely zero singular values as zero.
    const double sigma_max = sv(small - 1);
    const double zero_tol = 3e-8 * std::max(1.0, sigma_max);
    for (Eigen::Index i = 0; i < small; ++i)
        if (sv(i) < zero_tol) sv(i) = 0.0;

    out.tail(small) = sv;  // ascending; leading entries stay zero (rank padding)
    return out;
}

} // namespace gsamp::linalg
