#include "gsamp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "gsamp/errors.hpp"

namespace gsamp {
namespace {

void check_finite(const Eigen::VectorXd& v, const char* label) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v(i))) {
            std::ostringstream msg;
            msg << label << " has a non-finite value at node " << i;
            throw numerical_error(msg.str());
        }
    }
}

double sign_of(double x) { return (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_dims(const Eigen::VectorXd& e, const Graph& g, const ObservationMask& mask) {
    if (e.size() != g.n_nodes() || mask.n() != g.n_nodes())
        throw validation_error("aggregate: error vector, graph and mask sizes must agree");
}

} // namespace

Eigen::VectorXd error_signal(ErrorMode mode, const ObservationMask& mask,
                             const Eigen::VectorXd& y, const Eigen::VectorXd& xhat) {
    if (y.size() != xhat.size() || y.size() != mask.n())
        throw validation_error("error_signal: observation, estimate and mask sizes must agree");
    check_finite(y, "error_signal: observation");
    check_finite(xhat, "error_signal: estimate");

    Eigen::VectorXd e = Eigen::VectorXd::Zero(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!mask.observed(static_cast<int>(i))) continue;
        const double r = y(i) - xhat(i);
        e(i) = (mode == ErrorMode::Lms) ? r : sign_of(r);
    }
    return e;
}

Eigen::VectorXd aggregate_sum(const Eigen::VectorXd& e, const Graph& g,
                              const ObservationMask& mask, const WeightScheme& scheme) {
    check_dims(e, g, mask);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(e.size());
    for (int v = 0; v < g.n_nodes(); ++v) {
        double acc = 0.0;
        for (int j : g.neighbors(v)) acc += scheme.weight_for(classify_pair(mask, v, j)) * e(j);
        const int deg = g.degrees()(v);
        if (scheme.normalize_by_degree && deg > 0) acc /= static_cast<double>(deg);
        m(v) = acc;
    }
    return m;
}

Eigen::VectorXd aggregate_median(const Eigen::VectorXd& e, const Graph& g,
                                 const ObservationMask& mask, const WeightScheme& scheme) {
    check_dims(e, g, mask);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(e.size());
    std::vector<double> candidates;
    for (int v = 0; v < g.n_nodes(); ++v) {
        candidates.clear();
        for (int j : g.neighbors(v))
            if (scheme.weight_for(classify_pair(mask, v, j)) != 0.0) candidates.push_back(e(j));
        if (candidates.empty()) {
            m(v) = 0.0;
            continue;
        }
        std::sort(candidates.begin(), candidates.end());
        const std::size_t k = candidates.size();
        const double median = (k % 2 == 1)
                                  ? candidates[k / 2]
                                  : 0.5 * (candidates[k / 2 - 1] + candidates[k / 2]);
        const double status = mask.observed(v) ? scheme.w1 : scheme.w3;
        m(v) = status * median;
    }
    return m;
}

double smooth_message(const Eigen::VectorXd& theta, const Eigen::VectorXd& weights,
                      const Eigen::VectorXd& values) {
    if (theta.size() != weights.size() || theta.size() != values.size())
        throw validation_error("smooth_message: vector lengths must agree");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) acc += theta(i) * weights(i) * values(i);
    return acc;
}

Eigen::VectorXd aggregate_smooth(const Eigen::VectorXd& e, const Graph& g,
                                 const ObservationMask& mask, const WeightScheme& scheme,
                                 const LocalSmootherTable& smoothers) {
    check_dims(e, g, mask);
    if (static_cast<int>(smoothers.size()) != g.n_nodes())
        throw validation_error("aggregate_smooth: smoother table size does not match graph");

    Eigen::VectorXd m = Eigen::VectorXd::Zero(e.size());
    for (int v = 0; v < g.n_nodes(); ++v) {
        const LocalSmoother& sm = smoothers[static_cast<std::size_t>(v)];
        const auto& nbrs = g.neighbors(v);
        const std::size_t count = nbrs.size() + 1;
        if (sm.member_order.size() != count || sm.member_order.empty() ||
            sm.member_order[0] != v ||
            !std::equal(nbrs.begin(), nbrs.end(), sm.member_order.begin() + 1)) {
            std::ostringstream msg;
            msg << "aggregate_smooth: smoother member order at node " << v
                << " does not match the graph";
            throw validation_error(msg.str());
        }

        Eigen::VectorXd weights(static_cast<Eigen::Index>(count));
        Eigen::VectorXd values(static_cast<Eigen::Index>(count));
        weights(0) = mask.observed(v) ? scheme.w1 : scheme.w4;
        values(0) = e(v);
        for (std::size_t i = 1; i < count; ++i) {
            const int j = sm.member_order[i];
            weights(static_cast<Eigen::Index>(i)) = scheme.weight_for(classify_pair(mask, v, j));
            values(static_cast<Eigen::Index>(i)) = e(j);
        }
        m(v) = smooth_message(sm.theta_row, weights, values);
    }
    return m;
}

Eigen::VectorXd filtered_message(const FilterOperator& filter, double mu,
                                 const Eigen::VectorXd& e) {
    if (filter.matrix.rows() != e.size())
        throw validation_error("filtered_message: operator and error sizes must agree");
    return mu * (filter.matrix * e);
}

Eigen::VectorXd diffusion_init(const Graph& g, const ObservationMask& mask,
                               const Eigen::VectorXd& y0) {
    if (y0.size() != g.n_nodes() || mask.n() != g.n_nodes())
        throw validation_error("diffusion_init: observation, graph and mask sizes must agree");
    check_finite(y0, "diffusion_init: observation");

    const int n = g.n_nodes();
    Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
    std::vector<bool> filled(static_cast<std::size_t>(n), false);
    double observed_sum = 0.0;
    for (int v = 0; v < n; ++v) {
        if (mask.observed(v)) {
            values(v) = y0(v);
            filled[static_cast<std::size_t>(v)] = true;
            observed_sum += y0(v);
        }
    }
    const double observed_mean = observed_sum / mask.observed_count();

    // Breadth-wise passes: each pass fills nodes adjacent to the previously
    // filled set with the mean of those already-filled neighbors.
    bool progress = true;
    while (progress) {
        progress = false;
        std::vector<std::pair<int, double>> pending;
        for (int v = 0; v < n; ++v) {
            if (filled[static_cast<std::size_t>(v)]) continue;
            double acc = 0.0;
            int count = 0;
            for (int j : g.neighbors(v)) {
                if (filled[static_cast<std::size_t>(j)]) {
                    acc += values(j);
                    ++count;
                }
            }
            if (count > 0) pending.emplace_back(v, acc / count);
        }
        for (const auto& [v, val] : pending) {
            values(v) = val;
            filled[static_cast<std::size_t>(v)] = true;
            progress = true;
        }
    }

    for (int v = 0; v < n; ++v)
        if (!filled[static_cast<std::size_t>(v)]) values(v) = observed_mean;
    return values;
}

Eigen::VectorXd gsamp_message(const Eigen::VectorXd& e, const Graph& g,
                              const ObservationMask& mask, const GsampOptions& options) {
    if (options.khop < 1) throw validation_error("gsamp_message: khop must be >= 1");

    if (options.aggregator == AggregatorKind::GlobalFilter) {
        if (options.global_filter == nullptr)
            throw validation_error("gsamp_message: GlobalFilter aggregator needs a filter operator");
        return filtered_message(*options.global_filter, options.global_step, e);
    }

    Eigen::VectorXd m = e;
    for (int hop = 0; hop < options.khop; ++hop) {
        switch (options.aggregator) {
            case AggregatorKind::Sum:
                m = aggregate_sum(m, g, mask, options.weights);
                break;
            case AggregatorKind::Median:
                m = aggregate_median(m, g, mask, options.weights);
                break;
            case AggregatorKind::Smooth:
                if (options.smoothers == nullptr)
                    throw validation_error("gsamp_message: Smooth aggregator needs a smoother table");
                m = aggregate_smooth(m, g, mask, options.weights, *options.smoothers);
                break;
            case AggregatorKind::GlobalFilter:
                break;  // handled above
        }
    }
    return m;
}

void OnlineEstimator::reset(const Eigen::VectorXd& x0) {
    if (x0.size() != n_) throw validation_error("OnlineEstimator::reset: wrong state size");
    check_finite(x0, "OnlineEstimator::reset: initial state");
    xhat_ = x0;
    t_ = 0;
}

void OnlineEstimator::commit(const Eigen::VectorXd& message) {
    Eigen::VectorXd candidate = xhat_ + message;
    for (Eigen::Index i = 0; i < candidate.size(); ++i) {
        if (!std::isfinite(candidate(i))) {
            std::ostringstream msg;
            msg << name_ << ": step " << t_ << " produced a non-finite estimate at node " << i;
            throw numerical_error(msg.str());
        }
    }
    xhat_ = std::move(candidate);
    ++t_;
}

GsampEstimator::GsampEstimator(std::string name, const Graph& g, const ObservationMask& mask,
                               GsampOptions options)
    : OnlineEstimator(std::move(name), g.n_nodes()),
      graph_(g),
      mask_(mask),
      options_(std::move(options)) {
    if (mask.n() != g.n_nodes())
        throw validation_error("GsampEstimator: mask size does not match graph");
    if (options_.aggregator == AggregatorKind::Smooth && options_.smoothers == nullptr)
        throw validation_error("GsampEstimator: Smooth aggregator needs a smoother table");
    if (options_.aggregator == AggregatorKind::GlobalFilter && options_.global_filter == nullptr)
        throw validation_error("GsampEstimator: GlobalFilter aggregator needs a filter operator");
    xhat_ = Eigen::VectorXd::Zero(g.n_nodes());
}

void GsampEstimator::step(const Eigen::VectorXd& y) {
    const Eigen::VectorXd e = error_signal(options_.mode, mask_, y, xhat_);
    Eigen::VectorXd m = gsamp_message(e, graph_, mask_, options_);
    if (options_.stability_guard) {
        const double m_norm2 = m.squaredNorm();
        const double x_norm2 = xhat_.squaredNorm();
        if (m_norm2 > x_norm2) {
            const double scale = (m_norm2 > 0.0) ? std::sqrt(x_norm2 / m_norm2) : 0.0;
            std::ostringstream msg;
            msg << name_ << ": step " << t_ << " message norm " << std::sqrt(m_norm2)
                << " exceeds estimate norm " << std::sqrt(x_norm2) << "; rescaling";
            log_warning(msg.str());
            m *= scale;
        }
    }
    commit(m);
}

FilteredAdaptiveEstimator::FilteredAdaptiveEstimator(std::string name, const ObservationMask& mask,
                                                     FilterOperator filter, ErrorMode mode,
                                                     double mu)
    : OnlineEstimator(std::move(name), mask.n()),
      mask_(mask),
      filter_(std::move(filter)),
      mode_(mode),
      mu_(mu) {
    if (filter_.matrix.rows() != mask.n())
        throw validation_error("FilteredAdaptiveEstimator: operator size does not match mask");
    xhat_ = Eigen::VectorXd::Zero(mask.n());
}

void FilteredAdaptiveEstimator::step(const Eigen::VectorXd& y) {
    const Eigen::VectorXd e = error_signal(mode_, mask_, y, xhat_);
    commit(filtered_message(filter_, mu_, e));
}

namespace {

Eigen::VectorXd filtered_step(ErrorMode mode, const Eigen::VectorXd& xhat,
                              const Eigen::VectorXd& y, const ObservationMask& mask,
                              const FilterOperator& filter, double mu) {
    const Eigen::VectorXd e = error_signal(mode, mask, y, xhat);
    return xhat + filtered_message(filter, mu, e);
}

void require_chebyshev(const FilterOperator& filter, const char* op) {
    if (filter.kind != FilterOperator::Kind::Chebyshev) {
        std::ostringstream msg;
        msg << op << ": expects a Chebyshev surrogate operator";
        throw validation_error(msg.str());
    }
}

} // namespace

Eigen::VectorXd glms_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                          const ObservationMask& mask, const FilterOperator& filter, double mu) {
    return filtered_step(ErrorMode::Lms, xhat, y, mask, filter, mu);
}

Eigen::VectorXd gsign_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                           const ObservationMask& mask, const FilterOperator& filter, double mu) {
    return filtered_step(ErrorMode::Sign, xhat, y, mask, filter, mu);
}

Eigen::VectorXd gdlms_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                           const ObservationMask& mask, const FilterOperator& filter, double mu) {
    require_chebyshev(filter, "gdlms_step");
    return filtered_step(ErrorMode::Lms, xhat, y, mask, filter, mu);
}

Eigen::VectorXd gsd_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                         const ObservationMask& mask, const FilterOperator& filter, double mu) {
    require_chebyshev(filter, "gsd_step");
    return filtered_step(ErrorMode::Sign, xhat, y, mask, filter, mu);
}

} // namespace gsamp
