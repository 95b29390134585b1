#pragma once

#include <string>
#include <vector>

#include "gsamp/experiment.hpp"

namespace gsamp {

/// Parse a plain-text configuration into a RunConfig.
///
/// Format: `key = value` lines, `#`/`;` comments, blank lines ignored.
/// Global keys must precede the first `[estimator]` section; each
/// `[estimator]` section contributes one EstimatorSpec. Every key is checked
/// against the schema below; unknown keys, malformed values and out-of-range
/// values raise config_error naming the offending line.
///
/// Global keys:
///   seed, trials, graph_k, observed, bandwidth, cutoff_ratio, khop,
///   stability_guard, noise_alpha, noise_gamma, noise_mu, threads, log_scale,
///   cheb_order (default polynomial order for gdlms/gsd sections),
///   synth_nodes, synth_steps, synth_bandwidth, synth_rms,
///   synth_omega_min, synth_omega_max
///
/// Estimator keys:
///   name (required, unique), kind (gsamp|glms|gsign|gdlms|gsd, required),
///   and per kind:
///     gsamp: error_mode (lms|sign), aggregator (sum|median|smooth|global),
///            w1 w2 w3 w4, normalize_by_degree (sum only),
///            step_size (global aggregator only)
///     glms/gsign: step_size
///     gdlms/gsd:  step_size, cheb_order
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Load and parse a configuration file; io_error if unreadable.
RunConfig load_config(const std::string& path);

/// The seven canonical estimator columns in reporting order:
/// GSAMP-sum, GSAMP-median, GSAMP-smooth, GLMS, G-Sign, GDLMS, GSD.
/// `gsamp_mode` selects the error mode of the three GSAMP variants
/// (LMS for Gaussian noise settings, Sign for impulsive ones).
std::vector<EstimatorSpec> canonical_estimators(ErrorMode gsamp_mode, int cheb_order = 10);

}  // namespace gsamp
