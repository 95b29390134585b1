#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/estimators.hpp"
#include "gsamp/graph.hpp"
#include "gsamp/noise.hpp"

namespace gsamp {

/// MSE values above this ceiling (or non-finite trajectories) are clamped and
/// the trial is flagged as divergent rather than dropped.
inline constexpr double kMseCeiling = 1e12;

/// A station set with an N x T signal matrix (rows = nodes, columns = time).
struct Dataset {
    std::vector<GeoPoint> coords;
    Eigen::MatrixXd signal;
    std::string name;

    int n_nodes() const { return static_cast<int>(signal.rows()); }
    int t_steps() const { return static_cast<int>(signal.cols()); }
};

/// Shape of the synthetic band-limited test signal
/// x[t] = U_F (a ⊙ cos(ω t + φ) + b), rescaled to a target RMS.
struct SynthSpec {
    int bandwidth = 0;        // 0 = ceil(0.4 * n)
    double target_rms = 5.0;  // RMS of the generated signal entries
    double omega_min = 0.05;  // per-step angular rates of the coefficients
    double omega_max = 0.30;
};

enum class EstimatorKind { Gsamp, Glms, GSign, Gdlms, Gsd };

/// One estimator entry of a run: a message-passing configuration or one of
/// the spectral baselines.
struct EstimatorSpec {
    std::string name;
    EstimatorKind kind = EstimatorKind::Gsamp;
    // message-passing settings
    ErrorMode mode = ErrorMode::Sign;
    AggregatorKind aggregator = AggregatorKind::Sum;
    WeightScheme weights;
    int khop = 0;  // 0 = inherit the run-level khop
    // baseline settings
    double step_size = 1.6;
    int cheb_order = 10;
};

/// Full experiment configuration (defaults follow the reference study:
/// k = 5 neighbors, cutoff ratio 0.4, mu = 1.6 / 1.3, weight schemes per
/// aggregator, 100 trials).
struct RunConfig {
    std::uint64_t seed = 1;
    int trials = 100;
    int graph_k = 5;
    int observed = 0;        // 0 = auto: round(n * 130 / 197)
    int bandwidth = 0;       // 0 = auto: ceil(cutoff_ratio * n)
    double cutoff_ratio = 0.4;
    int khop = 1;
    bool stability_guard = false;
    SasParams noise{1.3, 0.1, 0.0};
    int threads = 1;
    bool log_scale = false;
    int synth_nodes = 60;
    int synth_steps = 95;
    SynthSpec synth;
    std::vector<EstimatorSpec> estimators;
};

/// Result of a single trial: the MSE trajectory for t = 1..T-1 plus the
/// divergence flag (capped values) and where divergence first occurred.
struct TrialResult {
    Eigen::VectorXd mse;
    bool diverged = false;
    int first_divergence_t = -1;
};

enum class DivergencePolicy {
    Throw,       // estimator failure propagates as numerical_error
    CapAndFlag,  // failure / ceiling breach caps the trajectory and flags it
};

struct ReportMeta {
    std::uint64_t seed = 0;
    int trials = 0;
    std::string rng_name;
    std::string version;
    std::string config_echo;
};

/// Monte-Carlo output: per-estimator mean MSE trajectories (rows) over
/// t = 1..T-1, time-averaged MSE, and divergent-trial counts.
struct MseReport {
    std::vector<std::string> estimator_names;
    Eigen::MatrixXd mse_mean;
    std::vector<double> avg_mse;
    std::vector<int> diverged_trials;
    ReportMeta meta;
};

/// Derived objects shared by every trial of a run: graph, spectral basis,
/// sampling mask, local smoothers and filter operators.
struct ExperimentSetup {
    Graph graph;
    EigenBasis basis;
    ObservationMask mask;
    LocalSmootherTable smoothers;                 // empty unless needed
    FilterOperator exact_filter;                  // empty matrix unless needed
    std::map<int, FilterOperator> cheb_filters;   // keyed by polynomial order
    int bandwidth = 0;
};

/// Load station coordinates from a CSV with header `id,lat,lon`, ids 0..N-1
/// in row order. Malformed content raises io_error naming the file and row.
std::vector<GeoPoint> load_stations(const std::string& stations_path);

/// Load a dataset from a stations CSV (see load_stations) and a signal CSV
/// (N rows of T comma-separated values). Malformed content raises io_error
/// naming the file, row and column.
Dataset load_dataset(const std::string& stations_path, const std::string& signal_path);

/// Seeded station coordinates in a mid-latitude box, pairwise distinct.
std::vector<GeoPoint> random_stations(int n, std::uint64_t seed);

/// Band-limited synthetic signal on the graph (see SynthSpec).
Eigen::MatrixXd synth_signal(const Graph& g, int t_steps, std::uint64_t seed,
                             const SynthSpec& spec);

/// Full synthetic dataset: random stations, k-NN graph, band-limited signal.
Dataset synth_dataset(int n_nodes, int graph_k, int t_steps, std::uint64_t seed,
                      const SynthSpec& spec);

/// Resolve auto defaults for bandwidth / observed count against a node count.
int resolve_bandwidth(const RunConfig& config, int n_nodes);
int resolve_observed(const RunConfig& config, int n_nodes);

/// Build the shared per-run objects from a config and dataset.
ExperimentSetup build_setup(const RunConfig& config, const Dataset& dataset);

/// Instantiate one estimator against the shared setup. The setup must outlive
/// the estimator.
std::unique_ptr<OnlineEstimator> make_estimator(const EstimatorSpec& spec,
                                                const ExperimentSetup& setup,
                                                const RunConfig& config);

/// One-step-ahead trial: x̂[0] = diffusion_init on the masked noisy first
/// sample, then for each t the estimator consumes y[t-1] = M_S(x[t-1] + ε)
/// (fresh noise per step) and MSE[t] compares x̂[t] to the clean x[t].
TrialResult run_trial(const Eigen::MatrixXd& signal, const Graph& g,
                      const ObservationMask& mask, const SasParams& noise,
                      OnlineEstimator& estimator, std::uint64_t seed,
                      DivergencePolicy policy = DivergencePolicy::Throw);

/// Run config.trials independent trials per estimator and average. Trial
/// seeds derive from (config seed, estimator-name hash, trial index), so the
/// results are independent of estimator order and of the thread count.
MseReport monte_carlo(const RunConfig& config, const Dataset& dataset);

} // namespace gsamp
