#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace blowlab {

// Initial data u0 supported by the lab. All shapes are radially evaluated
// through |x|^2 so the same object serves d = 1 and d = 2.
//   gaussian_bump:   u0(x) = c * exp(-k |x|^2)
//   constant:        u0(x) = c
//   indicator_ball:  u0(x) = c * 1{|x| <= radius}
//   tabulated:       1-d samples on a uniform grid, linearly interpolated,
//                    zero outside the tabulated range
struct InitialDatum {
    enum class Kind { gaussian_bump, constant, indicator_ball, tabulated };

    Kind kind = Kind::constant;
    double c = 0.0;
    double k = 1.0;
    double radius = 1.0;
    std::vector<double> table_x;
    std::vector<double> table_v;

    static InitialDatum gaussian_bump(double amplitude, double decay) {
        if (amplitude < 0.0) throw std::invalid_argument("gaussian_bump: amplitude must be >= 0");
        if (!(decay > 0.0)) throw std::invalid_argument("gaussian_bump: decay rate must be > 0");
        InitialDatum d;
        d.kind = Kind::gaussian_bump;
        d.c = amplitude;
        d.k = decay;
        return d;
    }

    static InitialDatum constant(double value) {
        InitialDatum d;
        d.kind = Kind::constant;
        d.c = value;
        return d;
    }

    static InitialDatum indicator_ball(double amplitude, double radius) {
        if (amplitude < 0.0) throw std::invalid_argument("indicator_ball: amplitude must be >= 0");
        if (!(radius > 0.0)) throw std::invalid_argument("indicator_ball: radius must be > 0");
        InitialDatum d;
        d.kind = Kind::indicator_ball;
        d.c = amplitude;
        d.radius = radius;
        return d;
    }

    static InitialDatum tabulated(std::vector<double> x, std::vector<double> v) {
        if (x.size() != v.size() || x.size() < 2)
            throw std::invalid_argument("tabulated: need matching x/value arrays with >= 2 nodes");
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            if (!(x[i + 1] > x[i]))
                throw std::invalid_argument("tabulated: grid must be strictly increasing");
        }
        for (double val : v) {
            if (!std::isfinite(val))
                throw std::invalid_argument("tabulated: values must be finite");
        }
        InitialDatum d;
        d.kind = Kind::tabulated;
        d.table_x = std::move(x);
        d.table_v = std::move(v);
        return d;
    }

    // Evaluate at squared radius r2 = |x|^2 (tabulated data is 1-d and uses
    // signed x through the dedicated overload below).
    double operator()(double x) const { return eval1d(x); }

    double eval1d(double x) const {
        switch (kind) {
            case Kind::gaussian_bump: return c * std::exp(-k * x * x);
            case Kind::constant: return c;
            case Kind::indicator_ball: return std::fabs(x) <= radius ? c : 0.0;
            case Kind::tabulated: return interp(x);
        }
        return 0.0;
    }

    double eval2d(double x0, double x1) const {
        const double r2 = x0 * x0 + x1 * x1;
        switch (kind) {
            case Kind::gaussian_bump: return c * std::exp(-k * r2);
            case Kind::constant: return c;
            case Kind::indicator_ball: return r2 <= radius * radius ? c : 0.0;
            case Kind::tabulated:
                throw std::invalid_argument("tabulated initial data is 1-d only");
        }
        return 0.0;
    }

    // Radius beyond which the datum is below `tiny` relative to its scale;
    // infinity is never needed because every supported shape decays or is
    // compactly supported.
    double support_radius(double tiny = 1e-12) const {
        switch (kind) {
            case Kind::gaussian_bump:
                if (c == 0.0) return 0.0;
                return std::sqrt(std::max(0.0, -std::log(tiny) / k));
            case Kind::constant: return 0.0;  // spatially homogeneous, no support scale
            case Kind::indicator_ball: return radius;
            case Kind::tabulated:
                return std::max(std::fabs(table_x.front()), std::fabs(table_x.back()));
        }
        return 0.0;
    }

    double sup_norm() const {
        switch (kind) {
            case Kind::gaussian_bump:
            case Kind::constant:
            case Kind::indicator_ball: return std::fabs(c);
            case Kind::tabulated: {
                double m = 0.0;
                for (double v : table_v) m = std::max(m, std::fabs(v));
                return m;
            }
        }
        return 0.0;
    }

private:
    double interp(double x) const {
        if (x <= table_x.front()) return x == table_x.front() ? table_v.front() : 0.0;
        if (x >= table_x.back()) return x == table_x.back() ? table_v.back() : 0.0;
        std::size_t lo = 0;
        std::size_t hi = table_x.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (table_x[mid] <= x ? lo : hi) = mid;
        }
        const double t = (x - table_x[lo]) / (table_x[lo + 1] - table_x[lo]);
        return table_v[lo] + t * (table_v[lo + 1] - table_v[lo]);
    }
};

} // namespace blowlab
