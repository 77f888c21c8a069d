#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "blowlab/rng.hpp"

namespace blowlab {

// One discretized Brownian trajectory on a uniform grid t_i = i * dt,
// values[0] = 0, increments N(0, dt) drawn from the stream of `seed`.
struct BrownianPath {
    double dt = 0.0;
    std::vector<double> values;  // n_steps + 1 entries
    SeedSpec seed;

    std::size_t n_steps() const { return values.empty() ? 0 : values.size() - 1; }
    double horizon() const { return dt * static_cast<double>(n_steps()); }
    double time_at(std::size_t i) const { return dt * static_cast<double>(i); }

    // Index of a grid time; throws if t is not on the grid (relative
    // tolerance 1e-9 of a step).
    std::size_t index_of(double t) const {
        const double r = t / dt;
        const auto i = static_cast<std::size_t>(std::llround(r));
        if (i > n_steps() || std::fabs(r - static_cast<double>(i)) > 1e-9)
            throw std::invalid_argument("BrownianPath: time is not on the path grid");
        return i;
    }

    double value_at(double t) const { return values[index_of(t)]; }

    // Linear interpolation between grid nodes; exact at grid times.
    double interpolate(double t) const {
        if (t <= 0.0) return 0.0;
        const double r = t / dt;
        const auto i = static_cast<std::size_t>(r);
        if (i >= n_steps()) return values.back();
        const double frac = r - static_cast<double>(i);
        return values[i] + frac * (values[i + 1] - values[i]);
    }
};

// Stream ids within a path's seed: 0 drives the increments, 1 the bridge
// midpoints of refine_path, 2+ are free for consumers.
inline constexpr std::uint64_t kStreamIncrements = 0;
inline constexpr std::uint64_t kStreamRefinement = 1;

inline BrownianPath sample_path(double horizon, std::size_t n_steps, SeedSpec seed) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_path: horizon must be > 0");
    if (n_steps == 0) throw std::invalid_argument("sample_path: n_steps must be >= 1");
    BrownianPath path;
    path.dt = horizon / static_cast<double>(n_steps);
    path.seed = seed;
    path.values.resize(n_steps + 1);
    path.values[0] = 0.0;
    CounterRng rng(seed, kStreamIncrements);
    const double scale = std::sqrt(path.dt);
    for (std::size_t i = 0; i < n_steps; ++i) {
        path.values[i + 1] = path.values[i] + scale * rng.next_gaussian();
    }
    return path;
}

// Brownian-bridge refinement: halve dt by drawing each midpoint conditional
// on its endpoints, N((B_i + B_{i+1})/2, dt/4). The refined path agrees with
// the coarse one at the original grid times.
inline BrownianPath refine_path(const BrownianPath& coarse) {
    if (coarse.n_steps() == 0) throw std::invalid_argument("refine_path: empty path");
    BrownianPath fine;
    fine.dt = 0.5 * coarse.dt;
    fine.seed = coarse.seed;
    fine.values.resize(2 * coarse.n_steps() + 1);
    CounterRng rng(coarse.seed, kStreamRefinement);
    const double half_sd = 0.5 * std::sqrt(coarse.dt);
    for (std::size_t i = 0; i < coarse.n_steps(); ++i) {
        fine.values[2 * i] = coarse.values[i];
        fine.values[2 * i + 1] =
            0.5 * (coarse.values[i] + coarse.values[i + 1]) + half_sd * rng.next_gaussian();
    }
    fine.values.back() = coarse.values.back();
    return fine;
}

// Trapezoid approximation of the exponential functional
//   integral_0^T e^{a s + b B_s} ds
// over the full path grid.
inline double exp_functional(const BrownianPath& path, double a, double b) {
    if (path.n_steps() == 0) throw std::invalid_argument("exp_functional: empty path");
    double f_prev = 1.0;  // exp at s = 0
    double sum = 0.0;
    for (std::size_t i = 1; i < path.values.size(); ++i) {
        const double f = std::exp(a * path.time_at(i) + b * path.values[i]);
        sum += 0.5 * (f_prev + f);
        f_prev = f;
    }
    return sum * path.dt;
}

struct ExpFunctionalRun {
    double integral = 0.0;         // full-horizon running trapezoid total
    std::optional<double> tau;     // first threshold crossing, if any
};

// Single pass over the path computing the running trapezoid integral of
// e^{a s + b B_s} and its first crossing of `threshold`, interpolated
// linearly inside the crossing step. Because the integrand is positive the
// two outputs are exactly consistent: tau is absent iff the full integral
// stays below the threshold.
inline ExpFunctionalRun exp_functional_with_tau(const BrownianPath& path, double a, double b,
                                                double threshold) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("exp_functional_with_tau: threshold must be > 0");
    if (path.n_steps() == 0) throw std::invalid_argument("exp_functional_with_tau: empty path");
    ExpFunctionalRun run;
    double f_prev = 1.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < path.values.size(); ++i) {
        const double f = std::exp(a * path.time_at(i) + b * path.values[i]);
        const double inc = 0.5 * (f_prev + f) * path.dt;
        if (!run.tau && acc + inc >= threshold) {
            const double frac = inc > 0.0 ? (threshold - acc) / inc : 0.0;
            run.tau = path.time_at(i - 1) + frac * path.dt;
        }
        acc += inc;
        f_prev = f;
    }
    run.integral = acc;
    return run;
}

// First time the running trapezoid integral of e^{-(lambda1 + kappa^2/2)
// beta s + kappa beta B_s} reaches `threshold`. nullopt means the threshold
// is not reached by the path horizon.
inline std::optional<double> tau_hitting(const BrownianPath& path, double lambda1, double kappa,
                                         double beta, double threshold) {
    const double a = -(lambda1 + 0.5 * kappa * kappa) * beta;
    const double b = kappa * beta;
    return exp_functional_with_tau(path, a, b, threshold).tau;
}

// Indicator of the event e^{-(p-1) sigma^2 t/2 + (p-1) sigma B_t} > eps at a
// grid time t_eval; compared in log space so extreme arguments cannot
// overflow.
inline bool event_exp_exceeds(const BrownianPath& path, double p, double sigma, double epsilon,
                              double t_eval) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("event_exp_exceeds: epsilon must be > 0");
    const double B = path.value_at(t_eval);
    const double exponent = -0.5 * (p - 1.0) * sigma * sigma * t_eval + (p - 1.0) * sigma * B;
    return exponent > std::log(epsilon);
}

} // namespace blowlab
