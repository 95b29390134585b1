#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsamp/experiment.hpp"

namespace gsamp {

/// Companion paths derived from the trajectory CSV path: the summary CSV and
/// the run-metadata text file live next to it with `_summary.csv` and
/// `_meta.txt` suffixes.
std::string summary_path_for(const std::string& csv_path);
std::string metadata_path_for(const std::string& csv_path);

/// Write a Monte-Carlo report to disk:
///   - `csv_path`: trajectory CSV with header `estimator,t,mse_mean`
///     (one row per estimator per t, t = 1..T-1, values at full precision),
///   - summary CSV (derived path) with header `estimator,avg_mse`,
///   - metadata text file (derived path) echoing the configuration, seed,
///     RNG identity, version and divergent-trial counts,
///   - `svg_path`: line chart of the MSE trajectories with axes, ticks and a
///     legend; `log_scale` switches the ordinate to log10.
/// Raises validation_error for an empty report and io_error when a file
/// cannot be created.
void write_report(const MseReport& report, const std::string& csv_path,
                  const std::string& svg_path, bool log_scale = false);

/// Parsed form of the trajectory CSV, used for round-trip verification.
struct TrajectoryCsv {
    std::vector<std::string> estimator_names;
    Eigen::MatrixXd mse_mean;  // same layout as MseReport::mse_mean
};

TrajectoryCsv read_trajectory_csv(const std::string& path);

/// Parsed rows of the summary CSV, in file order.
std::vector<std::pair<std::string, double>> read_summary_csv(const std::string& path);

}  // namespace gsamp
