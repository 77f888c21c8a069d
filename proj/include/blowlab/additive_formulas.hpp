#pragma once

#include <cmath>
#include <stdexcept>

#include "blowlab/special_functions.hpp"

namespace blowlab {

// Inputs to every additive-noise probability: the solution at a fixed space-
// time point is conv(u0) + sigma * B_t, i.e. Gaussian with mean -A and
// variance sigma^2 t, where A is the drift offset from offset_A().
struct AdditiveNoiseParams {
    double sigma = 1.0;
    double t = 1.0;
    double A = 0.0;

    void validate() const {
        if (!(sigma > 0.0)) throw std::domain_error("AdditiveNoiseParams: sigma must be > 0");
        if (!(t > 0.0)) throw std::domain_error("AdditiveNoiseParams: t must be > 0");
        if (!std::isfinite(A)) throw std::domain_error("AdditiveNoiseParams: A must be finite");
    }

    double scaled_offset() const { return A / (sigma * std::sqrt(t)); }
};

// P(u(x,t) > 0) = 1 - Phi(A / (sigma sqrt(t))). At least 1/2 when A <= 0.
inline double positivity_probability(const AdditiveNoiseParams& params) {
    params.validate();
    return 1.0 - normal_cdf(params.scaled_offset());
}

// P(u(x,t) <= 0) = Phi(A / (sigma sqrt(t))), the complement of the above.
inline double nonpositivity_probability(const AdditiveNoiseParams& params) {
    params.validate();
    return normal_cdf(params.scaled_offset());
}

// P(a < u(x,t) <= b) = Phi((b+A)/(sigma sqrt t)) - Phi((a+A)/(sigma sqrt t)).
// Infinite endpoints are allowed and give the one-sided / total mass limits.
inline double interval_probability(double a, double b, const AdditiveNoiseParams& params) {
    params.validate();
    if (!(a < b)) throw std::invalid_argument("interval_probability: need a < b");
    const double scale = params.sigma * std::sqrt(params.t);
    return normal_cdf((b + params.A) / scale) - normal_cdf((a + params.A) / scale);
}

// Exact decay rate of 1 - P(u > 0) as sigma -> 0: the tail Phi(A/(sigma
// sqrt t)) against the reference envelope exp(-A^2 / (2 sigma^2 t)).
struct VanishingNoiseRate {
    double tail;
    double reference;
};

inline VanishingNoiseRate vanishing_noise_rate(const AdditiveNoiseParams& params) {
    params.validate();
    if (!(params.A < 0.0))
        throw std::domain_error("vanishing_noise_rate: requires A < 0 (positive-retention case)");
    const double z = params.scaled_offset();
    return {normal_cdf(z), std::exp(-0.5 * z * z)};
}

enum class SignDirection { nonnegative, nonpositive };

struct SignBound {
    SignDirection direction;
    double bound;  // P(u >= 0) >= bound, or P(u <= 0) >= bound
};

// Jensen bound for the nonlinear additive equation du = (Lap u + k u^p) dt
// + sigma dB with even p: the sign of k fixes the favored sign of u.
inline SignBound jensen_sign_bound(int p, double k, const AdditiveNoiseParams& params) {
    params.validate();
    if (p < 2 || p % 2 != 0)
        throw std::invalid_argument("jensen_sign_bound: p must be an even integer >= 2");
    if (k == 0.0) throw std::invalid_argument("jensen_sign_bound: k must be nonzero");
    const double z = params.scaled_offset();
    if (k > 0.0) return {SignDirection::nonnegative, 1.0 - normal_cdf(z)};
    return {SignDirection::nonpositive, normal_cdf(z)};
}

} // namespace blowlab
