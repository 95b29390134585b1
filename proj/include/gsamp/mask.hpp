#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/spectral.hpp"

namespace gsamp {

/// Time-invariant observation mask: which nodes are sampled. At least one
/// node must be observed.
class ObservationMask {
public:
    explicit ObservationMask(std::vector<bool> observed);

    int n() const { return static_cast<int>(observed_.size()); }
    bool observed(int v) const { return observed_[static_cast<std::size_t>(v)]; }
    int observed_count() const { return observed_count_; }
    const std::vector<bool>& flags() const { return observed_; }

    /// One CSV line of 0/1 flags, e.g. "1,0,1".
    std::string to_csv_line() const;
    static ObservationMask from_csv_line(const std::string& line);

private:
    std::vector<bool> observed_;
    int observed_count_ = 0;
};

/// Edge weight class of a directed receiver/sender pair, after the paper's
/// four-way split of the scheme (w1..w4).
enum class WeightClass {
    BothObserved,           // w1: v observed, j observed
    ObservedFromMissing,    // w2: v observed, j missing
    MissingFromObserved,    // w3: v missing,  j observed
    BothMissing,            // w4: v missing,  j missing
};

/// Classify the receiver v / sender j pair under the mask.
WeightClass classify_pair(const ObservationMask& mask, int v, int j);

/// Entrywise masking: y_i = x_i where observed, 0 elsewhere.
Eigen::VectorXd apply_mask(const ObservationMask& mask, const Eigen::VectorXd& x);

/// Result of greedy sampling-set selection, exposing the selection order and
/// per-step scores so the trace can be checked against independent oracles.
struct GreedySelection {
    ObservationMask mask;
    std::vector<int> order;                          // nodes in pick order
    std::vector<std::pair<double, double>> scores;   // (sigma_min, sum log nonzero sigma)
};

/// Greedy max-min-singular-value sampling design on the rows of the first
/// bandwidth columns of the eigenvector matrix. Each step adds the candidate
/// maximizing the smallest singular value of the selected row block; while the
/// block has fewer rows than `bandwidth` every sigma_min is zero and the
/// tie-break prefers the larger product of nonzero singular values, then the
/// smaller node index. Preconditions: 1 <= bandwidth <= m <= n.
GreedySelection greedy_select_trace(const EigenBasis& basis, int m, int bandwidth);

/// Same selection, mask only.
ObservationMask greedy_select(const EigenBasis& basis, int m, int bandwidth);

} // namespace gsamp
