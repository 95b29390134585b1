#pragma once

#include <string>
#include <vector>

namespace gsamp {

/// Command-line front end. `args` excludes the program name.
///
/// Subcommands:
///   run    — Monte-Carlo experiment on a dataset (CSV pair or synthetic),
///            writes trajectory/summary CSVs, metadata and an SVG chart.
///   synth  — generate a synthetic dataset in the documented CSV schema.
///   mask   — compute and export the greedy observation mask for a graph.
///   table1 — run the canonical 6-noise-setting × 7-estimator grid and print
///            one summary table per setting (best *, second-best +); with a
///            197-station, 95-step dataset, deviations beyond ±15% of the
///            bundled reference averages are flagged.
///
/// Exit codes: 0 success, 1 runtime failure (I/O, numerical), 2 usage or
/// configuration error.
int run_cli(const std::vector<std::string>& args);

/// argv-style overload; argv[0] is the program name.
int run_cli(int argc, const char* const* argv);

}  // namespace gsamp
