#pragma once

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace blowlab {

// Standard normal distribution function via the complementary error
// function. Absolute accuracy is that of erfc (well below 1e-10); extreme
// tails underflow cleanly to 0 / 1.
inline double normal_cdf(double x) {
    if (std::isnan(x)) throw std::domain_error("normal_cdf: x must not be NaN");
    return 0.5 * std::erfc(-x * 0.7071067811865475244008443621048490393);
}

// Lower regularized incomplete gamma P(a, x).
inline double gamma_lower_regularized(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("gamma_lower_regularized: a must be > 0");
    if (x < 0.0) throw std::domain_error("gamma_lower_regularized: x must be >= 0");
    return boost::math::gamma_p(a, x);
}

} // namespace blowlab
