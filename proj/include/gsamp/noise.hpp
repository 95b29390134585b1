#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace gsamp {

/// Symmetric alpha-stable distribution parameters: stability exponent
/// alpha in (0, 2], dispersion gamma > 0, location mu.
struct SasParams {
    double alpha = 2.0;
    double gamma = 0.1;
    double mu = 0.0;
};

/// Draw n i.i.d. symmetric alpha-stable samples with the Chambers-Mallows-
/// Stuck transform, deterministically from the seed (xoshiro256++ stream).
///
/// Branches:
///  - alpha in (0, 2) \ {1}: X = mu + gamma^(1/alpha) *
///        sin(alpha U) / cos(U)^(1/alpha) * (cos(U - alpha U) / W)^((1-alpha)/alpha)
///    with U ~ Uniform(-pi/2, pi/2), W ~ Exp(1); characteristic function
///    exp(i mu t - gamma |t|^alpha).
///  - alpha == 1 (Cauchy): X = mu + gamma * tan(U).
///  - alpha == 2: exact Gaussian branch X = mu + gamma * 2 sin(U) sqrt(W),
///    i.e. N(mu, 2 gamma^2). Here gamma acts as the conventional scale
///    parameter, matching the documented variance 2 gamma^2; the dispersion
///    scaling gamma^(1/alpha) applies to the heavy-tailed branches only.
Eigen::VectorXd sample_sas(const SasParams& params, int n, std::uint64_t seed);

/// Real part of the empirical characteristic function, mean of cos(t * x_i).
/// Errors on an empty sample.
double empirical_char_fn(const Eigen::VectorXd& samples, double t);

} // namespace gsamp
