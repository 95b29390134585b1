#include "gsamp/noise.hpp"

#include <cmath>
#include <sstream>

#include "gsamp/errors.hpp"
#include "gsamp/rng.hpp"

namespace gsamp {
namespace {

void check_params(const SasParams& p) {
    if (!(p.alpha > 0.0 && p.alpha <= 2.0)) {
        std::ostringstream msg;
        msg << "sample_sas: alpha must lie in (0, 2] (got " << p.alpha << ")";
        throw validation_error(msg.str());
    }
    if (!(p.gamma > 0.0)) {
        std::ostringstream msg;
        msg << "sample_sas: gamma must be positive (got " << p.gamma << ")";
        throw validation_error(msg.str());
    }
    if (!std::isfinite(p.mu)) throw validation_error("sample_sas: mu must be finite");
}

} // namespace

Eigen::VectorXd sample_sas(const SasParams& params, int n, std::uint64_t seed) {
    check_params(params);
    if (n < 1) throw validation_error("sample_sas: n must be >= 1");

    Xoshiro256pp rng(seed);
    Eigen::VectorXd out(n);

    const double alpha = params.alpha;
    for (int i = 0; i < n; ++i) {
        const double u = M_PI * (rng.uniform01() - 0.5);   // Uniform(-pi/2, pi/2)
        const double w = -std::log(rng.uniform01());       // Exp(1), argument never 0

        double standard;
        if (alpha == 2.0) {
            standard = 2.0 * std::sin(u) * std::sqrt(w);   // exact N(0, 2)
            out(i) = params.mu + params.gamma * standard;
            continue;
        }
        if (alpha == 1.0) {
            standard = std::tan(u);
        } else {
            standard = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
                       std::pow(std::cos(u - alpha * u) / w, (1.0 - alpha) / alpha);
        }
        out(i) = params.mu + std::pow(params.gamma, 1.0 / alpha) * standard;
    }
    return out;
}

double empirical_char_fn(const Eigen::VectorXd& samples, double t) {
    if (samples.size() == 0)
        throw validation_error("empirical_char_fn: sample vector is empty");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < samples.size(); ++i) acc += std::cos(t * samples(i));
    return acc / static_cast<double>(samples.size());
}

} // namespace gsamp
