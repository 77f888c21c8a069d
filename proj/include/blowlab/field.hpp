#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "blowlab/initial_datum.hpp"

namespace blowlab {

// Uniform node-centered grid: [xmin, xmax] in d = 1, the tensor square in
// d = 2 (same axis in both directions). n is nodes per axis, endpoints
// included.
struct Grid {
    double xmin = -1.0;
    double xmax = 1.0;
    std::size_t n = 2;
    int d = 1;

    void validate() const {
        if (!(xmax > xmin)) throw std::invalid_argument("Grid: xmax must exceed xmin");
        if (n < 3) throw std::invalid_argument("Grid: need at least 3 nodes per axis");
        if (d != 1 && d != 2) throw std::invalid_argument("Grid: d must be 1 or 2");
    }

    double h() const { return (xmax - xmin) / static_cast<double>(n - 1); }
    double node(std::size_t i) const { return xmin + static_cast<double>(i) * h(); }
    std::size_t size() const { return d == 1 ? n : n * n; }
    std::size_t idx(std::size_t i, std::size_t j) const { return i * n + j; }

    // Nearest node index to x; throws if x is off-grid by more than a
    // relative tolerance.
    std::size_t index_of(double x) const {
        const double r = (x - xmin) / h();
        const auto i = static_cast<std::size_t>(std::llround(r));
        if (i >= n || std::fabs(r - static_cast<double>(i)) > 1e-8)
            throw std::invalid_argument("Grid: point is not a grid node");
        return i;
    }
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    static ScalarField zero(const Grid& g) {
        g.validate();
        return {g, std::vector<double>(g.size(), 0.0)};
    }

    // Sample u0 on the grid with homogeneous Dirichlet boundary nodes.
    static ScalarField sample(const Grid& g, const InitialDatum& u0) {
        ScalarField f = zero(g);
        if (g.d == 1) {
            for (std::size_t i = 1; i + 1 < g.n; ++i) f.values[i] = u0.eval1d(g.node(i));
        } else {
            for (std::size_t i = 1; i + 1 < g.n; ++i)
                for (std::size_t j = 1; j + 1 < g.n; ++j)
                    f.values[g.idx(i, j)] = u0.eval2d(g.node(i), g.node(j));
        }
        return f;
    }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::fabs(v));
        return m;
    }

    double min_value() const {
        double m = values.empty() ? 0.0 : values.front();
        for (double v : values) m = std::min(m, v);
        return m;
    }

    double at(double x) const { return values[grid.index_of(x)]; }
};

// Trapezoid quadrature of weight(x) * field(x) over the grid. The weight
// arity (one or two coordinates) must match the grid dimension.
template <class Weight>
double pair_with(const ScalarField& f, Weight&& weight) {
    const Grid& g = f.grid;
    const double h = g.h();
    if constexpr (std::is_invocable_v<Weight&, double, double>) {
        if (g.d != 2) throw std::invalid_argument("pair_with: 2-d weight on a 1-d field");
        double sum = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) {
            const double wi = (i == 0 || i + 1 == g.n) ? 0.5 : 1.0;
            for (std::size_t j = 0; j < g.n; ++j) {
                const double wj = (j == 0 || j + 1 == g.n) ? 0.5 : 1.0;
                sum += wi * wj * weight(g.node(i), g.node(j)) * f.values[g.idx(i, j)];
            }
        }
        return sum * h * h;
    } else {
        if (g.d != 1) throw std::invalid_argument("pair_with: 1-d weight on a 2-d field");
        double sum = 0.0;
        for (std::size_t i = 0; i < g.n; ++i) {
            const double w = (i == 0 || i + 1 == g.n) ? 0.5 : 1.0;
            sum += w * weight(g.node(i)) * f.values[i];
        }
        return sum * h;
    }
}

} // namespace blowlab
