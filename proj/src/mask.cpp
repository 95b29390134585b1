#include "gsamp/mask.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gsamp/errors.hpp"
#include "gsamp/linalg.hpp"

namespace gsamp {

ObservationMask::ObservationMask(std::vector<bool> observed) : observed_(std::move(observed)) {
    if (observed_.empty()) throw validation_error("ObservationMask: empty flag vector");
    observed_count_ = static_cast<int>(std::count(observed_.begin(), observed_.end(), true));
    if (observed_count_ == 0)
        throw validation_error("ObservationMask: at least one node must be observed");
}

std::string ObservationMask::to_csv_line() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < observed_.size(); ++i) {
        if (i > 0) out << ',';
        out << (observed_[i] ? '1' : '0');
    }
    return out.str();
}

ObservationMask ObservationMask::from_csv_line(const std::string& line) {
    std::vector<bool> flags;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) {
        // Trim whitespace tolerantly; only bare 0/1 tokens are accepted.
        const auto begin = cell.find_first_not_of(" \t\r\n");
        const auto end = cell.find_last_not_of(" \t\r\n");
        const std::string token =
            (begin == std::string::npos) ? "" : cell.substr(begin, end - begin + 1);
        if (token == "0") {
            flags.push_back(false);
        } else if (token == "1") {
            flags.push_back(true);
        } else {
            std::ostringstream msg;
            msg << "ObservationMask: invalid flag '" << token << "' in CSV line";
            throw validation_error(msg.str());
        }
    }
    return ObservationMask(flags);
}

WeightClass classify_pair(const ObservationMask& mask, int v, int j) {
    if (v < 0 || v >= mask.n() || j < 0 || j >= mask.n())
        throw validation_error("classify_pair: node index out of range");
    const bool vo = mask.observed(v);
    const bool jo = mask.observed(j);
    if (vo && jo) return WeightClass::BothObserved;
    if (vo) return WeightClass::ObservedFromMissing;
    if (jo) return WeightClass::MissingFromObserved;
    return WeightClass::BothMissing;
}

Eigen::VectorXd apply_mask(const ObservationMask& mask, const Eigen::VectorXd& x) {
    if (x.size() != mask.n()) {
        std::ostringstream msg;
        msg << "apply_mask: signal length " << x.size() << " does not match mask size " << mask.n();
        throw validation_error(msg.str());
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (mask.observed(static_cast<int>(i))) y(i) = x(i);
    return y;
}

GreedySelection greedy_select_trace(const EigenBasis& basis, int m, int bandwidth) {
    const int n = basis.n();
    if (bandwidth < 1 || bandwidth > n)
        throw validation_error("greedy_select: bandwidth must lie in [1, n]");
    if (m < bandwidth || m > n)
        throw validation_error("greedy_select: observed count must lie in [bandwidth, n]");

    const Eigen::MatrixXd rows = basis.eigenvectors.leftCols(bandwidth);

    std::vector<int> selected;
    std::vector<std::pair<double, double>> scores;
    std::vector<bool> in_set(static_cast<std::size_t>(n), false);

    Eigen::MatrixXd block(m, bandwidth);
    for (int step = 0; step < m; ++step) {
        int best = -1;
        double best_sigma_min = -1.0;
        double best_log_prod = 0.0;
        // Scores within this tolerance count as tied so that mathematically
        // equal candidates (whose singular values differ only by rounding
        // noise of the eigenvector entries) fall through to the documented
        // smallest-index tie-break. Scores are O(1): rows of an orthonormal
        // matrix have singular values in [0, 1].
        constexpr double kTieTol = 1e-9;
        for (int c = 0; c < n; ++c) {
            if (in_set[static_cast<std::size_t>(c)]) continue;
            block.row(step) = rows.row(c);
            const Eigen::VectorXd sv =
                linalg::singular_values_padded(block.topRows(step + 1), bandwidth);
            const double sigma_min = sv(0);
            double log_prod = 0.0;
            for (Eigen::Index i = 0; i < sv.size(); ++i)
                if (sv(i) > 0.0) log_prod += std::log(sv(i));
            const bool sigma_better = sigma_min > best_sigma_min + kTieTol;
            const bool sigma_tied = std::abs(sigma_min - best_sigma_min) <= kTieTol;
            const bool better =
                sigma_better || (sigma_tied && log_prod > best_log_prod + kTieTol);
            // Candidates are scanned in ascending node order, so keeping the
            // incumbent on ties prefers the smaller index.
            if (best == -1 || better) {
                best = c;
                best_sigma_min = sigma_min;
                best_log_prod = log_prod;
            }
        }
        selected.push_back(best);
        scores.emplace_back(best_sigma_min, best_log_prod);
        in_set[static_cast<std::size_t>(best)] = true;
        block.row(step) = rows.row(best);
    }

    std::vector<bool> flags(static_cast<std::size_t>(n), false);
    for (int v : selected) flags[static_cast<std::size_t>(v)] = true;
    GreedySelection result{ObservationMask(flags), std::move(selected), std::move(scores)};
    return result;
}

ObservationMask greedy_select(const EigenBasis& basis, int m, int bandwidth) {
    return greedy_select_trace(basis, m, bandwidth).mask;
}

} // namespace gsamp
