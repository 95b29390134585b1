#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gsamp/errors.hpp"
#include "gsamp/experiment.hpp"
#include "gsamp/mask.hpp"
#include "gsamp/report.hpp"
#include "gsamp/rng.hpp"
#include "gsamp/spectral.hpp"

using namespace gsamp;

namespace {

// Temp file that removes itself; paths live in the test working directory.
struct TempFile {
    std::string path;
    TempFile(std::string p, const std::string& content) : path(std::move(p)) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(static_cast<bool>(in));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Negligible-noise parameters: alpha = 2 gives Gaussian noise with standard
// deviation gamma * sqrt(2) ~ 1e-30, invisible at the tolerances used here.
const SasParams kTinyNoise{2.0, 1e-30, 0.0};

// 3-node path dataset with hand-set columns used by the trial-protocol oracle.
struct PathFixture {
    Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
    ObservationMask all{{true, true, true}};
    Eigen::MatrixXd signal{3, 3};
    EigenBasis basis = eigendecompose(g.laplacian());
    FilterOperator identity = ideal_lowpass_operator(basis, 1.0);

    PathFixture() {
        signal.col(0) << 1.0, 2.0, 3.0;
        signal.col(1) << 2.0, 0.0, 4.0;
        signal.col(2) << 1.0, 1.0, 1.0;
    }
};

RunConfig small_synth_config() {
    RunConfig config;
    config.seed = 7;
    config.trials = 4;
    config.graph_k = 3;
    config.noise = SasParams{1.3, 0.1, 0.0};
    config.synth_nodes = 16;
    config.synth_steps = 12;

    EstimatorSpec sum;
    sum.name = "GSAMP-sum";
    sum.kind = EstimatorKind::Gsamp;
    sum.mode = ErrorMode::Sign;
    sum.aggregator = AggregatorKind::Sum;
    sum.weights = WeightScheme{0.05, 0.0, 0.1, 0.0, true};

    EstimatorSpec glms;
    glms.name = "GLMS";
    glms.kind = EstimatorKind::Glms;
    glms.step_size = 1.6;

    config.estimators = {sum, glms};
    return config;
}

Dataset small_synth_dataset(const RunConfig& config) {
    SynthSpec spec;
    spec.target_rms = 1.0;
    spec.omega_min = 0.02;
    spec.omega_max = 0.08;
    return synth_dataset(config.synth_nodes, config.graph_k, config.synth_steps,
                         derive_seed(config.seed, 0xD5u), spec);
}

} // namespace

TEST_CASE("load_dataset reads well-formed station and signal files") {
    const TempFile stations("exp_stations_ok.csv",
                            "id,lat,lon\n0,10,20\n1,11,21\n");
    const TempFile signal("exp_signal_ok.csv", "1,2,3\n4,5,6\n");
    const Dataset ds = load_dataset(stations.path, signal.path);
    CHECK(ds.n_nodes() == 2);
    CHECK(ds.t_steps() == 3);
    CHECK(ds.coords[0].lat_deg == 10.0);
    CHECK(ds.coords[1].lon_deg == 21.0);
    CHECK(ds.signal(0, 0) == 1.0);
    CHECK(ds.signal(1, 2) == 6.0);
    CHECK(ds.name == "exp_stations_ok");
}

TEST_CASE("load_dataset rejects malformed inputs with located errors") {
    const TempFile stations("exp_stations_2.csv", "id,lat,lon\n0,10,20\n1,11,21\n");

    SUBCASE("row-count mismatch names both counts") {
        const TempFile signal("exp_signal_3rows.csv", "1,2\n3,4\n5,6\n");
        try {
            load_dataset(stations.path, signal.path);
            FAIL("expected io_error");
        } catch (const io_error& err) {
            const std::string what = err.what();
            CHECK(what.find("3 rows") != std::string::npos);
            CHECK(what.find("2 stations") != std::string::npos);
        }
    }
    SUBCASE("non-numeric cell names row and column") {
        const TempFile signal("exp_signal_bad_cell.csv", "1,2,3\n4,x,6\n");
        try {
            load_dataset(stations.path, signal.path);
            FAIL("expected io_error");
        } catch (const io_error& err) {
            const std::string what = err.what();
            CHECK(what.find("row 2") != std::string::npos);
            CHECK(what.find("column 2") != std::string::npos);
            CHECK(what.find("'x'") != std::string::npos);
        }
    }
    SUBCASE("ragged signal rows are rejected with the row number") {
        const TempFile signal("exp_signal_ragged.csv", "1,2,3\n4,5\n");
        try {
            load_dataset(stations.path, signal.path);
            FAIL("expected io_error");
        } catch (const io_error& err) {
            CHECK(std::string(err.what()).find("row 2") != std::string::npos);
        }
    }
    SUBCASE("single time step violates the T >= 2 invariant") {
        const TempFile signal("exp_signal_t1.csv", "1\n2\n");
        CHECK_THROWS_AS(load_dataset(stations.path, signal.path), io_error);
    }
    SUBCASE("missing files name the path") {
        try {
            load_dataset("exp_no_such_stations.csv", "exp_no_such_signal.csv");
            FAIL("expected io_error");
        } catch (const io_error& err) {
            CHECK(std::string(err.what()).find("exp_no_such_stations.csv") != std::string::npos);
        }
        const TempFile ok_signal("exp_signal_ok2.csv", "1,2\n3,4\n");
        try {
            load_dataset(stations.path, "exp_no_such_signal.csv");
            FAIL("expected io_error");
        } catch (const io_error& err) {
            CHECK(std::string(err.what()).find("exp_no_such_signal.csv") != std::string::npos);
        }
    }
    SUBCASE("bad station header and out-of-order ids") {
        const TempFile bad_header("exp_stations_hdr.csv", "station,lat,lon\n0,1,2\n1,2,3\n");
        const TempFile ok_signal("exp_signal_ok3.csv", "1,2\n3,4\n");
        CHECK_THROWS_AS(load_dataset(bad_header.path, ok_signal.path), io_error);
        const TempFile bad_ids("exp_stations_ids.csv", "id,lat,lon\n0,1,2\n2,2,3\n");
        try {
            load_dataset(bad_ids.path, ok_signal.path);
            FAIL("expected io_error");
        } catch (const io_error& err) {
            CHECK(std::string(err.what()).find("expected 1") != std::string::npos);
        }
    }
}

TEST_CASE("synth_signal spectral structure") {
    const std::vector<GeoPoint> pts = random_stations(14, 31);
    const Graph g = build_knn_graph(pts, 3);

    SUBCASE("bandwidth 1 on a connected graph is spatially constant") {
        SynthSpec spec;
        spec.bandwidth = 1;
        const Eigen::MatrixXd x = synth_signal(g, 6, 5, spec);
        for (int t = 0; t < 6; ++t) {
            CHECK(x.col(t).maxCoeff() - x.col(t).minCoeff() <= 1e-9);
        }
    }
    SUBCASE("zero angular rate freezes the signal in time") {
        SynthSpec spec;
        spec.omega_min = 0.0;
        spec.omega_max = 0.0;
        const Eigen::MatrixXd x = synth_signal(g, 5, 5, spec);
        for (int t = 1; t < 5; ++t) {
            REQUIRE((x.col(t).array() == x.col(0).array()).all());
        }
    }
    SUBCASE("transform coefficients vanish above the bandwidth") {
        SynthSpec spec;
        spec.bandwidth = 5;
        const Eigen::MatrixXd x = synth_signal(g, 8, 17, spec);
        const EigenBasis basis = eigendecompose(g.laplacian());
        const Eigen::MatrixXd gft = basis.eigenvectors.transpose() * x;
        CHECK(gft.bottomRows(gft.rows() - 5).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("entries are rescaled to the target RMS") {
        SynthSpec spec;
        spec.target_rms = 2.5;
        const Eigen::MatrixXd x = synth_signal(g, 9, 23, spec);
        const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
        CHECK(rms == doctest::Approx(2.5).epsilon(1e-12));
    }
    SUBCASE("invalid parameters are rejected") {
        CHECK_THROWS_AS(synth_signal(g, 1, 5, SynthSpec{}), validation_error);
        SynthSpec bad_rms;
        bad_rms.target_rms = 0.0;
        CHECK_THROWS_AS(synth_signal(g, 5, 5, bad_rms), validation_error);
        SynthSpec bad_omega;
        bad_omega.omega_min = 0.3;
        bad_omega.omega_max = 0.1;
        CHECK_THROWS_AS(synth_signal(g, 5, 5, bad_omega), validation_error);
        SynthSpec bad_bw;
        bad_bw.bandwidth = 15;
        CHECK_THROWS_AS(synth_signal(g, 5, 5, bad_bw), validation_error);
    }
}

TEST_CASE("synth_dataset is deterministic in the seed") {
    SynthSpec spec;
    spec.target_rms = 1.5;
    const Dataset a = synth_dataset(12, 3, 10, 99, spec);
    const Dataset b = synth_dataset(12, 3, 10, 99, spec);
    REQUIRE(a.coords.size() == b.coords.size());
    for (std::size_t i = 0; i < a.coords.size(); ++i) {
        CHECK(a.coords[i].lat_deg == b.coords[i].lat_deg);
        CHECK(a.coords[i].lon_deg == b.coords[i].lon_deg);
    }
    CHECK((a.signal.array() == b.signal.array()).all());

    const Dataset c = synth_dataset(12, 3, 10, 100, spec);
    CHECK((a.signal.array() != c.signal.array()).any());
}

TEST_CASE("auto defaults for bandwidth and observed count") {
    RunConfig config;
    CHECK(resolve_bandwidth(config, 60) == 24);
    CHECK(resolve_observed(config, 60) == 40);
    CHECK(resolve_bandwidth(config, 197) == 79);
    CHECK(resolve_observed(config, 197) == 130);
    config.bandwidth = 10;
    config.observed = 33;
    CHECK(resolve_bandwidth(config, 197) == 10);
    CHECK(resolve_observed(config, 197) == 33);
}

TEST_CASE("run_trial follows the one-step-ahead protocol") {
    PathFixture fx;

    SUBCASE("frozen estimator measures drift from the initial state") {
        // Zero-weight estimator never moves, so x̂[t] stays at the diffusion
        // initialization, which (all observed, ~zero noise) equals x[0]:
        //   MSE[1] = |x[1]-x[0]|^2/3 = (1+4+1)/3 = 2
        //   MSE[2] = |x[2]-x[0]|^2/3 = (0+1+4)/3 = 5/3
        GsampOptions options;
        options.weights = WeightScheme{0.0, 0.0, 0.0, 0.0, false};
        GsampEstimator frozen("frozen", fx.g, fx.all, options);
        const TrialResult r = run_trial(fx.signal, fx.g, fx.all, kTinyNoise, frozen, 11);
        REQUIRE(r.mse.size() == 2);
        CHECK_FALSE(r.diverged);
        CHECK(r.mse(0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(r.mse(1) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("identity-filter GLMS with mu=1 predicts the previous sample") {
        // x̂[t] = y[t-1] ~= x[t-1], so each MSE entry is the mean squared
        // one-step temporal change:
        //   MSE[1] = |x[1]-x[0]|^2/3 = 2,  MSE[2] = |x[2]-x[1]|^2/3 = 11/3.
        FilteredAdaptiveEstimator glms("glms", fx.all, fx.identity, ErrorMode::Lms, 1.0);
        const TrialResult r = run_trial(fx.signal, fx.g, fx.all, kTinyNoise, glms, 11);
        REQUIRE(r.mse.size() == 2);
        CHECK(r.mse(0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(r.mse(1) == doctest::Approx(11.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("time-invariant signal gives (near) zero error throughout") {
        Eigen::MatrixXd flat(3, 4);
        for (int t = 0; t < 4; ++t) flat.col(t) << 2.0, 2.5, 3.0;
        FilteredAdaptiveEstimator glms("glms", fx.all, fx.identity, ErrorMode::Lms, 1.0);
        const TrialResult r = run_trial(flat, fx.g, fx.all, kTinyNoise, glms, 3);
        REQUIRE(r.mse.size() == 3);
        CHECK(r.mse.maxCoeff() <= 1e-24);
    }
    SUBCASE("trajectories are reproducible and seed-sensitive") {
        const SasParams noise{1.3, 0.1, 0.0};
        GsampOptions options;
        GsampEstimator est("mp", fx.g, fx.all, options);
        const TrialResult a = run_trial(fx.signal, fx.g, fx.all, noise, est, 42);
        const TrialResult b = run_trial(fx.signal, fx.g, fx.all, noise, est, 42);
        const TrialResult c = run_trial(fx.signal, fx.g, fx.all, noise, est, 43);
        REQUIRE((a.mse.array() == b.mse.array()).all());
        CHECK((a.mse.array() != c.mse.array()).any());
    }
    SUBCASE("size mismatches are rejected") {
        GsampOptions options;
        GsampEstimator est("mp", fx.g, fx.all, options);
        Eigen::MatrixXd wrong(4, 3);
        wrong.setZero();
        CHECK_THROWS_AS(run_trial(wrong, fx.g, fx.all, kTinyNoise, est, 1), validation_error);
        Eigen::MatrixXd short_t(3, 1);
        short_t.setZero();
        CHECK_THROWS_AS(run_trial(short_t, fx.g, fx.all, kTinyNoise, est, 1), validation_error);
    }
}

TEST_CASE("run_trial divergence handling") {
    PathFixture fx;
    const SasParams noise{2.0, 1.0, 0.0};

    SUBCASE("ceiling breaches cap the trajectory and set the flag") {
        // mu = 3 makes the deviation triple-minus-two per step (|factor| = 2),
        // so the squared error grows ~4x per step and crosses 1e12 quickly.
        FilteredAdaptiveEstimator wild("wild", fx.all, fx.identity, ErrorMode::Lms, 3.0);
        Eigen::MatrixXd flat(3, 60);
        for (int t = 0; t < 60; ++t) flat.col(t) << 1.0, 2.0, 3.0;
        const TrialResult r =
            run_trial(flat, fx.g, fx.all, noise, wild, 5, DivergencePolicy::CapAndFlag);
        REQUIRE(r.diverged);
        REQUIRE(r.first_divergence_t >= 1);
        REQUIRE(r.first_divergence_t < 60);
        for (Eigen::Index i = 0; i < r.mse.size(); ++i) {
            if (i + 1 >= r.first_divergence_t) {
                REQUIRE(r.mse(i) == kMseCeiling);
            } else {
                REQUIRE(r.mse(i) < kMseCeiling);
                REQUIRE(r.mse(i) >= 0.0);
            }
        }
    }
    SUBCASE("Throw policy propagates the numerical failure") {
        FilteredAdaptiveEstimator wild("runaway", fx.all, fx.identity, ErrorMode::Lms, 1e150);
        Eigen::MatrixXd flat(3, 10);
        for (int t = 0; t < 10; ++t) flat.col(t) << 1.0, 2.0, 3.0;
        try {
            run_trial(flat, fx.g, fx.all, noise, wild, 5, DivergencePolicy::Throw);
            FAIL("expected numerical_error");
        } catch (const numerical_error& err) {
            const std::string what = err.what();
            CHECK(what.find("runaway") != std::string::npos);
            CHECK(what.find("step") != std::string::npos);
        }
    }
    SUBCASE("CapAndFlag turns the failure into a capped tail") {
        FilteredAdaptiveEstimator wild("runaway", fx.all, fx.identity, ErrorMode::Lms, 1e150);
        Eigen::MatrixXd flat(3, 10);
        for (int t = 0; t < 10; ++t) flat.col(t) << 1.0, 2.0, 3.0;
        const TrialResult r =
            run_trial(flat, fx.g, fx.all, noise, wild, 5, DivergencePolicy::CapAndFlag);
        REQUIRE(r.diverged);
        REQUIRE(r.mse.size() == 9);
        CHECK(r.mse(r.mse.size() - 1) == kMseCeiling);
    }
}

TEST_CASE("monte_carlo aggregates independent seeded trials") {
    const RunConfig config = small_synth_config();
    const Dataset dataset = small_synth_dataset(config);

    SUBCASE("a single trial reproduces run_trial exactly") {
        RunConfig one = config;
        one.trials = 1;
        one.estimators = {config.estimators[0]};
        const MseReport report = monte_carlo(one, dataset);
        REQUIRE(report.estimator_names.size() == 1);

        const ExperimentSetup setup = build_setup(one, dataset);
        auto estimator = make_estimator(one.estimators[0], setup, one);
        const TrialResult direct = run_trial(
            dataset.signal, setup.graph, setup.mask, one.noise, *estimator,
            derive_seed(one.seed, fnv1a64(one.estimators[0].name), 0),
            DivergencePolicy::CapAndFlag);
        REQUIRE((report.mse_mean.row(0).transpose().array() == direct.mse.array()).all());
    }
    SUBCASE("reports are bitwise deterministic") {
        const MseReport a = monte_carlo(config, dataset);
        const MseReport b = monte_carlo(config, dataset);
        REQUIRE(a.estimator_names == b.estimator_names);
        REQUIRE((a.mse_mean.array() == b.mse_mean.array()).all());
        REQUIRE(a.avg_mse == b.avg_mse);
        REQUIRE(a.diverged_trials == b.diverged_trials);
    }
    SUBCASE("estimator order does not change any trajectory") {
        RunConfig swapped = config;
        std::swap(swapped.estimators[0], swapped.estimators[1]);
        const MseReport a = monte_carlo(config, dataset);
        const MseReport b = monte_carlo(swapped, dataset);
        REQUIRE(a.estimator_names[0] == b.estimator_names[1]);
        REQUIRE((a.mse_mean.row(0).array() == b.mse_mean.row(1).array()).all());
        REQUIRE((a.mse_mean.row(1).array() == b.mse_mean.row(0).array()).all());
    }
    SUBCASE("the thread count does not change the report") {
        RunConfig parallel = config;
        parallel.trials = 8;
        parallel.threads = 4;
        RunConfig serial = parallel;
        serial.threads = 1;
        const MseReport a = monte_carlo(serial, dataset);
        const MseReport b = monte_carlo(parallel, dataset);
        REQUIRE((a.mse_mean.array() == b.mse_mean.array()).all());
        REQUIRE(a.avg_mse == b.avg_mse);
    }
    SUBCASE("report invariants: finite, nonnegative, fully populated") {
        const MseReport report = monte_carlo(config, dataset);
        REQUIRE(report.estimator_names.size() == 2);
        REQUIRE(report.mse_mean.rows() == 2);
        REQUIRE(report.mse_mean.cols() == dataset.t_steps() - 1);
        REQUIRE(report.avg_mse.size() == 2);
        REQUIRE(report.diverged_trials.size() == 2);
        CHECK(report.mse_mean.allFinite());
        CHECK(report.mse_mean.minCoeff() >= 0.0);
        CHECK(report.meta.seed == config.seed);
        CHECK(report.meta.trials == config.trials);
        CHECK(report.meta.rng_name == "xoshiro256++ (seeded via splitmix64)");
        CHECK_FALSE(report.meta.version.empty());
        CHECK(report.meta.config_echo.find("seed = 7") != std::string::npos);
        CHECK(report.meta.config_echo.find("GSAMP-sum") != std::string::npos);
    }
    SUBCASE("invalid configurations are rejected") {
        RunConfig dup = config;
        dup.estimators.push_back(dup.estimators[0]);
        CHECK_THROWS_AS(monte_carlo(dup, dataset), validation_error);
        RunConfig none = config;
        none.estimators.clear();
        CHECK_THROWS_AS(monte_carlo(none, dataset), validation_error);
        RunConfig no_trials = config;
        no_trials.trials = 0;
        CHECK_THROWS_AS(monte_carlo(no_trials, dataset), validation_error);
    }
}

TEST_CASE("write_report emits csv, summary, metadata and svg") {
    RunConfig config = small_synth_config();
    config.trials = 2;
    const Dataset dataset = small_synth_dataset(config);
    const MseReport report = monte_carlo(config, dataset);

    const std::string csv_path = "exp_report_traj.csv";
    const std::string svg_path = "exp_report_chart.svg";
    write_report(report, csv_path, svg_path);

    SUBCASE("trajectory CSV round-trips the matrix at full precision") {
        const TrajectoryCsv parsed = read_trajectory_csv(csv_path);
        REQUIRE(parsed.estimator_names == report.estimator_names);
        REQUIRE(parsed.mse_mean.rows() == report.mse_mean.rows());
        REQUIRE(parsed.mse_mean.cols() == report.mse_mean.cols());
        REQUIRE((parsed.mse_mean.array() == report.mse_mean.array()).all());
    }
    SUBCASE("row counts match the report shape") {
        std::ifstream in(csv_path);
        std::string line;
        int lines = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++lines;
        CHECK(lines == 1 + 2 * (dataset.t_steps() - 1));  // header + rows
    }
    SUBCASE("summary CSV has one row per estimator") {
        const auto rows = read_summary_csv(summary_path_for(csv_path));
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].first == "GSAMP-sum");
        CHECK(rows[0].second == report.avg_mse[0]);
        CHECK(rows[1].first == "GLMS");
        CHECK(rows[1].second == report.avg_mse[1]);
    }
    SUBCASE("metadata records seed, rng identity and divergence counts") {
        const std::string meta = slurp(metadata_path_for(csv_path));
        CHECK(meta.find("seed = 7") != std::string::npos);
        CHECK(meta.find("rng = xoshiro256++ (seeded via splitmix64)") != std::string::npos);
        CHECK(meta.find("divergent_trials[GLMS]") != std::string::npos);
        CHECK(meta.find("version = ") != std::string::npos);
    }
    SUBCASE("SVG holds one polyline per estimator and a legend") {
        const std::string svg = slurp(svg_path);
        CHECK(svg.find("<svg") != std::string::npos);
        std::size_t polylines = 0;
        for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
             pos = svg.find("<polyline", pos + 1))
            ++polylines;
        CHECK(polylines == 2);
        CHECK(svg.find("GSAMP-sum") != std::string::npos);
        CHECK(svg.find("GLMS") != std::string::npos);
    }
    SUBCASE("log-scale variant also renders") {
        write_report(report, csv_path, svg_path, true);
        const std::string svg = slurp(svg_path);
        CHECK(svg.find("<svg") != std::string::npos);
    }

    std::remove(csv_path.c_str());
    std::remove(svg_path.c_str());
    std::remove(summary_path_for(csv_path).c_str());
    std::remove(metadata_path_for(csv_path).c_str());
}

TEST_CASE("write_report rejects empty reports and unwritable paths") {
    MseReport empty;
    CHECK_THROWS_AS(write_report(empty, "x.csv", "x.svg"), validation_error);

    RunConfig config = small_synth_config();
    config.trials = 1;
    const Dataset dataset = small_synth_dataset(config);
    const MseReport report = monte_carlo(config, dataset);
    CHECK_THROWS_AS(
        write_report(report, "/nonexistent_dir_for_tests/a.csv", "/nonexistent_dir_for_tests/a.svg"),
        io_error);
}
