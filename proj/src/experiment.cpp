#include "gsamp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "gsamp/errors.hpp"
#include "gsamp/rng.hpp"
#include "gsamp/version.hpp"

namespace gsamp {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) {
        const auto begin = cell.find_first_not_of(" \t\r\n");
        const auto end = cell.find_last_not_of(" \t\r\n");
        cells.push_back(begin == std::string::npos ? "" : cell.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_double_cell(const std::string& cell, const std::string& file, int row, int col) {
    const char* begin = cell.c_str();
    char* parse_end = nullptr;
    const double value = std::strtod(begin, &parse_end);
    if (cell.empty() || parse_end != begin + cell.size() || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << file << ": row " << row << ", column " << col << ": invalid numeric value '"
            << cell << "'";
        throw io_error(msg.str());
    }
    return value;
}

std::string file_stem(const std::string& path) {
    const auto slash = path.find_last_of("/\\");
    std::string base = (slash == std::string::npos) ? path : path.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    return (dot == std::string::npos) ? base : base.substr(0, dot);
}

} // namespace

std::vector<GeoPoint> load_stations(const std::string& stations_path) {
    std::ifstream stations(stations_path);
    if (!stations) throw io_error("cannot open stations file " + stations_path);

    std::vector<GeoPoint> coords;
    std::string line;
    int row = 0;
    if (!std::getline(stations, line))
        throw io_error(stations_path + ": empty stations file");
    {
        const auto header = split_csv_line(line);
        if (header.size() != 3 || header[0] != "id" || header[1] != "lat" || header[2] != "lon")
            throw io_error(stations_path + ": row 1: expected header 'id,lat,lon'");
        ++row;
    }
    while (std::getline(stations, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3) {
            std::ostringstream msg;
            msg << stations_path << ": row " << row << ": expected 3 columns, got " << cells.size();
            throw io_error(msg.str());
        }
        const double id = parse_double_cell(cells[0], stations_path, row, 1);
        const int expected = static_cast<int>(coords.size());
        if (id != static_cast<double>(expected)) {
            std::ostringstream msg;
            msg << stations_path << ": row " << row << ": station ids must be 0..N-1 in order (got "
                << cells[0] << ", expected " << expected << ")";
            throw io_error(msg.str());
        }
        GeoPoint p{parse_double_cell(cells[1], stations_path, row, 2),
                   parse_double_cell(cells[2], stations_path, row, 3)};
        if (!geo_point_valid(p)) {
            std::ostringstream msg;
            msg << stations_path << ": row " << row << ": coordinates out of range";
            throw io_error(msg.str());
        }
        coords.push_back(p);
    }
    if (coords.size() < 2) throw io_error(stations_path + ": need at least two stations");
    return coords;
}

Dataset load_dataset(const std::string& stations_path, const std::string& signal_path) {
    Dataset ds;
    ds.name = file_stem(stations_path);
    ds.coords = load_stations(stations_path);

    std::ifstream signal(signal_path);
    if (!signal) throw io_error("load_dataset: cannot open signal file " + signal_path);

    std::vector<std::vector<double>> rows;
    int row = 0;
    int t_steps = -1;
    std::string line;
    while (std::getline(signal, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (t_steps == -1) {
            t_steps = static_cast<int>(cells.size());
        } else if (static_cast<int>(cells.size()) != t_steps) {
            std::ostringstream msg;
            msg << signal_path << ": row " << row << ": expected " << t_steps
                << " columns, got " << cells.size();
            throw io_error(msg.str());
        }
        std::vector<double> values;
        values.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            values.push_back(parse_double_cell(cells[c], signal_path, row, static_cast<int>(c) + 1));
        rows.push_back(std::move(values));
    }
    if (rows.size() != ds.coords.size()) {
        std::ostringstream msg;
        msg << signal_path << ": signal has " << rows.size() << " rows but stations file lists "
            << ds.coords.size() << " stations";
        throw io_error(msg.str());
    }
    if (t_steps < 2) {
        std::ostringstream msg;
        msg << signal_path << ": need at least 2 time steps, got " << t_steps;
        throw io_error(msg.str());
    }

    ds.signal.resize(static_cast<Eigen::Index>(rows.size()), t_steps);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < t_steps; ++c)
            ds.signal(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    return ds;
}

std::vector<GeoPoint> random_stations(int n, std::uint64_t seed) {
    if (n < 2) throw validation_error("random_stations: need n >= 2");
    Xoshiro256pp rng(seed);
    std::vector<GeoPoint> points;
    points.reserve(static_cast<std::size_t>(n));
    while (static_cast<int>(points.size()) < n) {
        GeoPoint p{30.0 + 20.0 * rng.uniform01(), -120.0 + 50.0 * rng.uniform01()};
        const bool duplicate = std::any_of(points.begin(), points.end(), [&p](const GeoPoint& q) {
            return q.lat_deg == p.lat_deg && q.lon_deg == p.lon_deg;
        });
        if (!duplicate) points.push_back(p);
    }
    return points;
}

Eigen::MatrixXd synth_signal(const Graph& g, int t_steps, std::uint64_t seed,
                             const SynthSpec& spec) {
    if (t_steps < 2) throw validation_error("synth_signal: need at least 2 time steps");
    if (!(spec.target_rms > 0.0)) throw validation_error("synth_signal: target_rms must be positive");
    if (spec.omega_min < 0.0 || spec.omega_max < spec.omega_min)
        throw validation_error("synth_signal: omega range must satisfy 0 <= min <= max");

    const int n = g.n_nodes();
    int bandwidth = spec.bandwidth;
    if (bandwidth == 0) bandwidth = static_cast<int>(std::ceil(0.4 * n - 1e-9));
    if (bandwidth < 1 || bandwidth > n)
        throw validation_error("synth_signal: bandwidth out of range");

    const EigenBasis basis = eigendecompose(g.laplacian());

    Xoshiro256pp rng(seed);
    Eigen::MatrixXd coeffs(bandwidth, t_steps);
    for (int i = 0; i < bandwidth; ++i) {
        const double a = 0.5 + rng.uniform01();
        const double b = 2.0 * (rng.uniform01() - 0.5);
        const double omega = spec.omega_min + (spec.omega_max - spec.omega_min) * rng.uniform01();
        const double phi = 2.0 * M_PI * rng.uniform01();
        for (int t = 0; t < t_steps; ++t) coeffs(i, t) = a * std::cos(omega * t + phi) + b;
    }

    Eigen::MatrixXd x = basis.eigenvectors.leftCols(bandwidth) * coeffs;
    const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
    if (rms > 0.0) x *= spec.target_rms / rms;
    return x;
}

Dataset synth_dataset(int n_nodes, int graph_k, int t_steps, std::uint64_t seed,
                      const SynthSpec& spec) {
    Dataset ds;
    ds.coords = random_stations(n_nodes, derive_seed(seed, 0x5747u));
    const Graph g = build_knn_graph(ds.coords, graph_k);
    ds.signal = synth_signal(g, t_steps, derive_seed(seed, 0x516eu), spec);
    ds.name = "synthetic";
    return ds;
}

int resolve_bandwidth(const RunConfig& config, int n_nodes) {
    if (config.bandwidth > 0) return config.bandwidth;
    return static_cast<int>(std::ceil(config.cutoff_ratio * n_nodes - 1e-9));
}

int resolve_observed(const RunConfig& config, int n_nodes) {
    if (config.observed > 0) return config.observed;
    return static_cast<int>(std::lround(n_nodes * 130.0 / 197.0));
}

ExperimentSetup build_setup(const RunConfig& config, const Dataset& dataset) {
    if (dataset.coords.size() != static_cast<std::size_t>(dataset.n_nodes()))
        throw validation_error("build_setup: dataset coordinates do not match the signal rows");

    ExperimentSetup setup{Graph::from_edges(1, {}), EigenBasis{}, ObservationMask({true}), {}, {}, {}, 0};
    setup.graph = build_knn_graph(dataset.coords, config.graph_k);
    setup.basis = eigendecompose(setup.graph.laplacian());
    setup.bandwidth = resolve_bandwidth(config, setup.graph.n_nodes());
    const int observed = resolve_observed(config, setup.graph.n_nodes());
    setup.mask = greedy_select(setup.basis, observed, setup.bandwidth);

    bool needs_smoothers = false;
    bool needs_exact = false;
    std::set<int> cheb_orders;
    for (const auto& spec : config.estimators) {
        if (spec.kind == EstimatorKind::Gsamp && spec.aggregator == AggregatorKind::Smooth)
            needs_smoothers = true;
        if (spec.kind == EstimatorKind::Glms || spec.kind == EstimatorKind::GSign ||
            (spec.kind == EstimatorKind::Gsamp && spec.aggregator == AggregatorKind::GlobalFilter))
            needs_exact = true;
        if (spec.kind == EstimatorKind::Gdlms || spec.kind == EstimatorKind::Gsd)
            cheb_orders.insert(spec.cheb_order);
    }
    if (needs_smoothers)
        setup.smoothers = precompute_local_smoothers(setup.graph, config.cutoff_ratio);
    if (needs_exact) setup.exact_filter = ideal_lowpass_operator(setup.basis, config.cutoff_ratio);
    for (int order : cheb_orders)
        setup.cheb_filters.emplace(order, chebyshev_operator(setup.graph.laplacian(),
                                                             config.cutoff_ratio, order,
                                                             setup.basis.lambda_max()));
    return setup;
}

std::unique_ptr<OnlineEstimator> make_estimator(const EstimatorSpec& spec,
                                                const ExperimentSetup& setup,
                                                const RunConfig& config) {
    switch (spec.kind) {
        case EstimatorKind::Gsamp: {
            GsampOptions options;
            options.mode = spec.mode;
            options.aggregator = spec.aggregator;
            options.weights = spec.weights;
            options.khop = spec.khop > 0 ? spec.khop : config.khop;
            options.stability_guard = config.stability_guard;
            if (spec.aggregator == AggregatorKind::Smooth) options.smoothers = &setup.smoothers;
            if (spec.aggregator == AggregatorKind::GlobalFilter) {
                options.global_filter = &setup.exact_filter;
                options.global_step = spec.step_size;
            }
            return std::make_unique<GsampEstimator>(spec.name, setup.graph, setup.mask, options);
        }
        case EstimatorKind::Glms:
            return std::make_unique<FilteredAdaptiveEstimator>(spec.name, setup.mask,
                                                               setup.exact_filter, ErrorMode::Lms,
                                                               spec.step_size);
        case EstimatorKind::GSign:
            return std::make_unique<FilteredAdaptiveEstimator>(spec.name, setup.mask,
                                                               setup.exact_filter, ErrorMode::Sign,
                                                               spec.step_size);
        case EstimatorKind::Gdlms:
            return std::make_unique<FilteredAdaptiveEstimator>(
                spec.name, setup.mask, setup.cheb_filters.at(spec.cheb_order), ErrorMode::Lms,
                spec.step_size);
        case EstimatorKind::Gsd:
            return std::make_unique<FilteredAdaptiveEstimator>(
                spec.name, setup.mask, setup.cheb_filters.at(spec.cheb_order), ErrorMode::Sign,
                spec.step_size);
    }
    throw validation_error("make_estimator: unknown estimator kind");
}

TrialResult run_trial(const Eigen::MatrixXd& signal, const Graph& g,
                      const ObservationMask& mask, const SasParams& noise,
                      OnlineEstimator& estimator, std::uint64_t seed, DivergencePolicy policy) {
    const int n = static_cast<int>(signal.rows());
    const int t_steps = static_cast<int>(signal.cols());
    if (n != g.n_nodes() || mask.n() != n)
        throw validation_error("run_trial: signal, graph and mask sizes must agree");
    if (t_steps < 2) throw validation_error("run_trial: need at least 2 time steps");

    // Fresh noise per step: the draw for time index t comes from a stream
    // seeded by (trial seed, t), so trajectories are reproducible and the
    // observation at time 0 is shared by the initializer and the first step.
    auto noisy_observation = [&](int t) {
        const Eigen::VectorXd eps = sample_sas(noise, n, derive_seed(seed, static_cast<std::uint64_t>(t)));
        return apply_mask(mask, signal.col(t) + eps);
    };

    TrialResult result;
    result.mse = Eigen::VectorXd::Zero(t_steps - 1);

    Eigen::VectorXd y_prev = noisy_observation(0);
    estimator.reset(diffusion_init(g, mask, y_prev));

    for (int t = 1; t < t_steps; ++t) {
        try {
            estimator.step(y_prev);
        } catch (const numerical_error&) {
            if (policy == DivergencePolicy::Throw) throw;
            result.diverged = true;
            if (result.first_divergence_t < 0) result.first_divergence_t = t;
            for (int rest = t; rest < t_steps; ++rest) result.mse(rest - 1) = kMseCeiling;
            return result;
        }
        double mse = (signal.col(t) - estimator.estimate()).squaredNorm() / n;
        if (!std::isfinite(mse) || mse > kMseCeiling) {
            mse = kMseCeiling;
            result.diverged = true;
            if (result.first_divergence_t < 0) result.first_divergence_t = t;
        }
        result.mse(t - 1) = mse;
        if (t < t_steps - 1) y_prev = noisy_observation(t);
    }
    return result;
}

namespace {

std::string config_echo(const RunConfig& config, const Dataset& dataset) {
    std::ostringstream out;
    out << "dataset = " << dataset.name << " (" << dataset.n_nodes() << " nodes, "
        << dataset.t_steps() << " steps)\n";
    out << "seed = " << config.seed << "\n";
    out << "trials = " << config.trials << "\n";
    out << "graph_k = " << config.graph_k << "\n";
    out << "observed = " << resolve_observed(config, dataset.n_nodes()) << "\n";
    out << "bandwidth = " << resolve_bandwidth(config, dataset.n_nodes()) << "\n";
    out << "cutoff_ratio = " << config.cutoff_ratio << "\n";
    out << "khop = " << config.khop << "\n";
    out << "stability_guard = " << (config.stability_guard ? "true" : "false") << "\n";
    out << "noise_alpha = " << config.noise.alpha << "\n";
    out << "noise_gamma = " << config.noise.gamma << "\n";
    out << "noise_mu = " << config.noise.mu << "\n";
    out << "threads = " << config.threads << "\n";
    for (const auto& spec : config.estimators) {
        out << "[estimator] name = " << spec.name;
        switch (spec.kind) {
            case EstimatorKind::Gsamp: {
                out << ", kind = gsamp, error_mode = "
                    << (spec.mode == ErrorMode::Lms ? "lms" : "sign") << ", aggregator = ";
                switch (spec.aggregator) {
                    case AggregatorKind::Sum: out << "sum"; break;
                    case AggregatorKind::Median: out << "median"; break;
                    case AggregatorKind::Smooth: out << "smooth"; break;
                    case AggregatorKind::GlobalFilter: out << "global"; break;
                }
                out << ", weights = (" << spec.weights.w1 << ", " << spec.weights.w2 << ", "
                    << spec.weights.w3 << ", " << spec.weights.w4 << ")";
                if (spec.weights.normalize_by_degree) out << ", normalize_by_degree = true";
                break;
            }
            case EstimatorKind::Glms: out << ", kind = glms, step_size = " << spec.step_size; break;
            case EstimatorKind::GSign: out << ", kind = gsign, step_size = " << spec.step_size; break;
            case EstimatorKind::Gdlms:
                out << ", kind = gdlms, step_size = " << spec.step_size
                    << ", cheb_order = " << spec.cheb_order;
                break;
            case EstimatorKind::Gsd:
                out << ", kind = gsd, step_size = " << spec.step_size
                    << ", cheb_order = " << spec.cheb_order;
                break;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace

MseReport monte_carlo(const RunConfig& config, const Dataset& dataset) {
    if (config.estimators.empty())
        throw validation_error("monte_carlo: at least one estimator must be configured");
    if (config.trials < 1) throw validation_error("monte_carlo: trials must be >= 1");
    {
        std::set<std::string> names;
        for (const auto& spec : config.estimators)
            if (!names.insert(spec.name).second)
                throw validation_error("monte_carlo: duplicate estimator name '" + spec.name + "'");
    }

    const ExperimentSetup setup = build_setup(config, dataset);
    const int t_steps = dataset.t_steps();
    const int n_estimators = static_cast<int>(config.estimators.size());
    const int trials = config.trials;
    const int threads = std::max(1, config.threads);

    MseReport report;
    report.mse_mean = Eigen::MatrixXd::Zero(n_estimators, t_steps - 1);
    report.meta = ReportMeta{config.seed, trials, Xoshiro256pp::name(), kVersion,
                             config_echo(config, dataset)};

    for (int est_idx = 0; est_idx < n_estimators; ++est_idx) {
        const EstimatorSpec& spec = config.estimators[static_cast<std::size_t>(est_idx)];
        const std::uint64_t name_label = fnv1a64(spec.name);

        std::vector<TrialResult> results(static_cast<std::size_t>(trials));
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int trial = next.fetch_add(1);
                if (trial >= trials) return;
                auto estimator = make_estimator(spec, setup, config);
                results[static_cast<std::size_t>(trial)] =
                    run_trial(dataset.signal, setup.graph, setup.mask, config.noise, *estimator,
                              derive_seed(config.seed, name_label, static_cast<std::uint64_t>(trial)),
                              DivergencePolicy::CapAndFlag);
            }
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(threads));
            for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        // Sequential reduction in trial order keeps the output independent of
        // the thread count.
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(t_steps - 1);
        int diverged = 0;
        for (const auto& tr : results) {
            mean += tr.mse;
            if (tr.diverged) ++diverged;
        }
        mean /= static_cast<double>(trials);
        for (Eigen::Index i = 0; i < mean.size(); ++i)
            if (mean(i) > kMseCeiling) mean(i) = kMseCeiling;

        report.estimator_names.push_back(spec.name);
        report.mse_mean.row(est_idx) = mean.transpose();
        report.avg_mse.push_back(mean.mean());
        report.diverged_trials.push_back(diverged);
    }
    return report;
}

} // namespace gsamp
