#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "blowlab/initial_datum.hpp"
#include "blowlab/quadrature.hpp"

namespace blowlab {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Point in R^d, d in {1,2}; x1 is ignored for d = 1.
struct KernelQuery {
    double x0 = 0.0;
    double x1 = 0.0;
    double t = 0.0;
    int d = 1;
};

struct QuadratureSpec {
    std::size_t nodes_per_dim = 2001;  // trapezoid nodes per axis
    double radius_override = 0.0;      // > 0 forces the truncation radius
};

// Default truncation radius for the heat-kernel convolution: Gaussian tails
// are below 1e-9 beyond six standard deviations (std dev = sqrt(2t)), plus
// the support radius of the datum.
inline double convolution_radius(const InitialDatum& u0, double t) {
    const double six_sigma = 6.0 * std::sqrt(2.0 * t);
    return std::max(six_sigma, u0.support_radius() + six_sigma);
}

// Gaussian heat kernel (4 pi t)^{-d/2} exp(-|x|^2 / (4t)).
inline double heat_kernel_value(const KernelQuery& q) {
    if (!(q.t > 0.0)) throw std::domain_error("heat_kernel_value: t must be > 0");
    if (q.d != 1 && q.d != 2) throw std::domain_error("heat_kernel_value: d must be 1 or 2");
    if (!std::isfinite(q.x0) || !std::isfinite(q.x1))
        throw std::domain_error("heat_kernel_value: point must be finite");
    const double r2 = q.d == 1 ? q.x0 * q.x0 : q.x0 * q.x0 + q.x1 * q.x1;
    return std::pow(4.0 * kPi * q.t, -0.5 * q.d) * std::exp(-r2 / (4.0 * q.t));
}

// Truncated-domain quadrature of the heat semigroup acting on u0:
// integral of K(x - y, t) u0(y) dy over [-R, R]^d.
inline double convolve_initial(const InitialDatum& u0, double t, const KernelQuery& x,
                               const QuadratureSpec& quad = {}) {
    if (!(t > 0.0)) throw std::domain_error("convolve_initial: t must be > 0");
    if (quad.nodes_per_dim < 2)
        throw std::invalid_argument("convolve_initial: quadrature needs >= 2 nodes");
    if (quad.radius_override < 0.0)
        throw std::invalid_argument("convolve_initial: truncation radius must be positive");
    const double radius =
        quad.radius_override > 0.0 ? quad.radius_override : convolution_radius(u0, t);
    if (u0.kind == InitialDatum::Kind::tabulated && radius < u0.support_radius()) {
        throw std::runtime_error(
            "convolve_initial: truncation radius does not cover tabulated support");
    }
    const double norm = std::pow(4.0 * kPi * t, -0.5 * x.d);
    const double inv4t = 1.0 / (4.0 * t);
    if (x.d == 1) {
        auto f = [&](double y) {
            const double dx = x.x0 - y;
            return norm * std::exp(-dx * dx * inv4t) * u0.eval1d(y);
        };
        return trapezoid(f, -radius, radius, quad.nodes_per_dim);
    }
    if (x.d == 2) {
        auto f = [&](double y0, double y1) {
            const double d0 = x.x0 - y0;
            const double d1 = x.x1 - y1;
            return norm * std::exp(-(d0 * d0 + d1 * d1) * inv4t) * u0.eval2d(y0, y1);
        };
        return trapezoid_2d(f, -radius, radius, -radius, radius, quad.nodes_per_dim);
    }
    throw std::domain_error("convolve_initial: d must be 1 or 2");
}

// Drift offset of the additive-noise solution: A_t(x) = -(K(t) * u0)(x).
// Nonpositive whenever u0 >= 0.
inline double offset_A(const InitialDatum& u0, double t, const KernelQuery& x,
                       const QuadratureSpec& quad = {}) {
    return -convolve_initial(u0, t, x, quad);
}

} // namespace blowlab
