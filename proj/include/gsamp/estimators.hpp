#pragma once

#include <memory>
#include <string>

#include <Eigen/Dense>

#include "gsamp/graph.hpp"
#include "gsamp/mask.hpp"
#include "gsamp/spectral.hpp"

namespace gsamp {

/// Residual transform applied before aggregation: LMS keeps the masked
/// residual (p = 2 cost), SIGN keeps only its sign pattern (p = 1 cost),
/// which bounds every message and is what makes the sign family robust to
/// impulsive noise.
enum class ErrorMode { Lms, Sign };

/// Neighborhood aggregation rule producing the per-node message.
/// GlobalFilter is a diagnostic aggregator (message = mu * B * e) provided so
/// the message-passing update can be checked bit-for-bit against GLMS.
enum class AggregatorKind { Sum, Median, Smooth, GlobalFilter };

/// The four-class edge weighting (receiver v / sender j):
///   w1 both observed, w2 v observed & j missing,
///   w3 v missing & j observed, w4 both missing.
/// normalize_by_degree additionally divides SUM messages by the receiver's
/// degree, turning all-ones weights into a mean aggregation.
struct WeightScheme {
    double w1 = 1.0;
    double w2 = 0.0;
    double w3 = 2.0;
    double w4 = 0.0;
    bool normalize_by_degree = false;

    double weight_for(WeightClass c) const {
        switch (c) {
            case WeightClass::BothObserved: return w1;
            case WeightClass::ObservedFromMissing: return w2;
            case WeightClass::MissingFromObserved: return w3;
            case WeightClass::BothMissing: return w4;
        }
        return 0.0;
    }
};

/// Masked residual e = M_S(y - xhat) (LMS) or its entrywise sign with
/// sign(0) = 0 (SIGN). Non-finite inputs raise numerical_error naming the
/// offending node.
Eigen::VectorXd error_signal(ErrorMode mode, const ObservationMask& mask,
                             const Eigen::VectorXd& y, const Eigen::VectorXd& xhat);

/// Weighted-sum message: m_v = sum over neighbors j of w_class(v,j) * e_j,
/// divided by deg(v) when the scheme's normalize_by_degree is set.
Eigen::VectorXd aggregate_sum(const Eigen::VectorXd& e, const Graph& g,
                              const ObservationMask& mask, const WeightScheme& scheme);

/// Weighted-median message: the median of neighbor errors whose class weight
/// is nonzero (mean of the two middle values for even counts, 0 for an empty
/// candidate set), scaled by the receiver's status weight (w1 if observed,
/// w3 if missing).
Eigen::VectorXd aggregate_median(const Eigen::VectorXd& e, const Graph& g,
                                 const ObservationMask& mask, const WeightScheme& scheme);

/// Elementwise-weighted dot product theta . (w ⊙ values); the smoothing core
/// of the SMOOTH aggregator, exposed for direct numeric checks.
double smooth_message(const Eigen::VectorXd& theta, const Eigen::VectorXd& weights,
                      const Eigen::VectorXd& values);

/// Locally-smoothed message: m_v = theta_v . (w_v ⊙ e_neighborhood) with
/// theta_v the precomputed local low-pass row. The self entry is weighted w1
/// when v is observed and w4 when missing; neighbor entries use the pair
/// class. The table's member order must match the graph.
Eigen::VectorXd aggregate_smooth(const Eigen::VectorXd& e, const Graph& g,
                                 const ObservationMask& mask, const WeightScheme& scheme,
                                 const LocalSmootherTable& smoothers);

/// Shared filtered-residual message m = mu * (B * e). Both glms_step/
/// gsign_step and the GlobalFilter aggregator call this one function, so the
/// reduction of the message-passing update to GLMS is exact to the bit.
Eigen::VectorXd filtered_message(const FilterOperator& filter, double mu,
                                 const Eigen::VectorXd& e);

/// Initial estimate from the first observation: observed entries copy y0;
/// missing nodes take the mean of observed 1-hop neighbors, then repeated
/// passes fill from already-filled neighbors until a fixpoint; anything still
/// unfilled (no path to an observed node) takes the global observed mean.
Eigen::VectorXd diffusion_init(const Graph& g, const ObservationMask& mask,
                               const Eigen::VectorXd& y0);

/// Configuration of a message-passing estimator instance.
struct GsampOptions {
    ErrorMode mode = ErrorMode::Lms;
    AggregatorKind aggregator = AggregatorKind::Sum;
    WeightScheme weights;
    /// Number of aggregation applications per step (k-hop receptive field).
    int khop = 1;
    /// When enabled, a message with ||m||^2 > ||xhat||^2 is rescaled to
    /// ||m|| = ||xhat|| and a warning is logged.
    bool stability_guard = false;
    /// Required for AggregatorKind::Smooth.
    const LocalSmootherTable* smoothers = nullptr;
    /// Required for AggregatorKind::GlobalFilter.
    const FilterOperator* global_filter = nullptr;
    double global_step = 0.0;
};

/// One message vector for the current error signal (khop applications of the
/// configured aggregation, before any stability guard).
Eigen::VectorXd gsamp_message(const Eigen::VectorXd& e, const Graph& g,
                              const ObservationMask& mask, const GsampOptions& options);

/// Common online-estimator interface: estimate() is x̂[t], step(y) consumes
/// the observation at time t and advances to x̂[t+1]. A step that would
/// produce non-finite state raises numerical_error and leaves the estimator
/// unchanged.
class OnlineEstimator {
public:
    virtual ~OnlineEstimator() = default;

    void reset(const Eigen::VectorXd& x0);
    virtual void step(const Eigen::VectorXd& y) = 0;

    const Eigen::VectorXd& estimate() const { return xhat_; }
    const std::string& name() const { return name_; }
    int time() const { return t_; }

protected:
    OnlineEstimator(std::string name, int n) : name_(std::move(name)), n_(n) {}

    /// Validate and commit x̂ <- x̂ + m, advancing the step counter.
    void commit(const Eigen::VectorXd& message);

    std::string name_;
    int n_ = 0;
    Eigen::VectorXd xhat_;
    int t_ = 0;
};

/// Adaptive message-passing estimator (the GSAMP family):
/// x̂[t+1] = x̂[t] + m[t], with m[t] aggregated from masked neighbor errors.
class GsampEstimator final : public OnlineEstimator {
public:
    GsampEstimator(std::string name, const Graph& g, const ObservationMask& mask,
                   GsampOptions options);

    void step(const Eigen::VectorXd& y) override;
    const GsampOptions& options() const { return options_; }

private:
    const Graph& graph_;
    const ObservationMask& mask_;
    GsampOptions options_;
};

/// Spectral adaptive baselines sharing the update
/// x̂[t+1] = x̂[t] + mu * B * e[t]:
/// GLMS (exact B, LMS), G-Sign (exact B, SIGN), GDLMS (Chebyshev surrogate,
/// LMS), GSD (Chebyshev surrogate, SIGN).
class FilteredAdaptiveEstimator final : public OnlineEstimator {
public:
    FilteredAdaptiveEstimator(std::string name, const ObservationMask& mask,
                              FilterOperator filter, ErrorMode mode, double mu);

    void step(const Eigen::VectorXd& y) override;
    double mu() const { return mu_; }
    const FilterOperator& filter() const { return filter_; }

private:
    const ObservationMask& mask_;
    FilterOperator filter_;
    ErrorMode mode_;
    double mu_;
};

/// One-step functional forms of the baselines (pure; return the new
/// estimate). gdlms_step / gsd_step require a Chebyshev-kind operator.
Eigen::VectorXd glms_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                          const ObservationMask& mask, const FilterOperator& filter, double mu);
Eigen::VectorXd gsign_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                           const ObservationMask& mask, const FilterOperator& filter, double mu);
Eigen::VectorXd gdlms_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                           const ObservationMask& mask, const FilterOperator& filter, double mu);
Eigen::VectorXd gsd_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& y,
                         const ObservationMask& mask, const FilterOperator& filter, double mu);

} // namespace gsamp
