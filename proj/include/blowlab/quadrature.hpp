#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace blowlab {

// Composite trapezoid of f over [a,b] with n nodes (n >= 2).
template <class F>
double trapezoid(F&& f, double a, double b, std::size_t n) {
    if (n < 2) throw std::invalid_argument("trapezoid: need at least 2 nodes");
    const double h = (b - a) / static_cast<double>(n - 1);
    double sum = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i + 1 < n; ++i) {
        sum += f(a + static_cast<double>(i) * h);
    }
    return sum * h;
}

// Tensor-product trapezoid over [ax,bx] x [ay,by], n nodes per axis.
template <class F>
double trapezoid_2d(F&& f, double ax, double bx, double ay, double by, std::size_t n) {
    if (n < 2) throw std::invalid_argument("trapezoid_2d: need at least 2 nodes");
    const double hx = (bx - ax) / static_cast<double>(n - 1);
    const double hy = (by - ay) / static_cast<double>(n - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ax + static_cast<double>(i) * hx;
        const double wx = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double y = ay + static_cast<double>(j) * hy;
            const double wy = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
            row += wy * f(x, y);
        }
        total += wx * row;
    }
    return total * hx * hy;
}

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson with Richardson correction; tol is an absolute target.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

} // namespace blowlab
