#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blowlab/brownian.hpp"
#include "blowlab/field.hpp"
#include "blowlab/heat_kernel.hpp"
#include "blowlab/pde_model.hpp"

namespace blowlab {

namespace detail {

inline void zero_boundary(const Grid& g, std::vector<double>& v) {
    if (g.d == 1) {
        v.front() = 0.0;
        v.back() = 0.0;
        return;
    }
    const std::size_t n = g.n;
    for (std::size_t i = 0; i < n; ++i) {
        v[g.idx(0, i)] = 0.0;
        v[g.idx(n - 1, i)] = 0.0;
        v[g.idx(i, 0)] = 0.0;
        v[g.idx(i, n - 1)] = 0.0;
    }
}

// Backward-Euler diffusion factor (I - mu D2) with homogeneous Dirichlet
// ends; constant-coefficient Thomas solve with the forward sweep cached per
// mu. In 2-d the factorized form (I - mu Dx)(I - mu Dy) is applied, one
// tridiagonal sweep per grid line (O(dt^2) splitting, below the scheme
// order).
class DiffusionSolver {
public:
    explicit DiffusionSolver(const Grid& grid) : grid_(grid) {}

    void apply_inverse(std::vector<double>& v, double mu) {
        prepare(mu);
        const std::size_t n = grid_.n;
        if (grid_.d == 1) {
            solve_line(v.data(), 1);
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) solve_line(v.data() + i * n, 1);
        for (std::size_t j = 1; j + 1 < n; ++j) solve_line(v.data() + j, n);
    }

    // dt/h^2-scaled discrete Laplacian of u added onto out (interior only).
    void add_explicit_laplacian(const std::vector<double>& u, std::vector<double>& out,
                                double mu) const {
        const std::size_t n = grid_.n;
        if (grid_.d == 1) {
            for (std::size_t i = 1; i + 1 < n; ++i)
                out[i] += mu * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            for (std::size_t j = 1; j + 1 < n; ++j) {
                const std::size_t c = grid_.idx(i, j);
                out[c] += mu * (u[c - 1] + u[c + 1] + u[c - n] + u[c + n] - 4.0 * u[c]);
            }
        }
    }

private:
    void prepare(double mu) {
        if (mu == mu_cached_) return;
        const std::size_t m = grid_.n - 2;
        cprime_.resize(m);
        inv_denom_.resize(m);
        scratch_.resize(m);
        const double diag = 1.0 + 2.0 * mu;
        off_ = -mu;
        double prev_c = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double denom = diag - off_ * prev_c;
            inv_denom_[i] = 1.0 / denom;
            prev_c = off_ * inv_denom_[i];
            cprime_[i] = prev_c;
        }
        mu_cached_ = mu;
    }

    void solve_line(double* base, std::size_t stride) {
        const std::size_t m = grid_.n - 2;
        double* d = scratch_.data();
        d[0] = base[stride] * inv_denom_[0];
        for (std::size_t i = 1; i < m; ++i) {
            d[i] = (base[(i + 1) * stride] - off_ * d[i - 1]) * inv_denom_[i];
        }
        base[m * stride] = d[m - 1];
        for (std::size_t i = m - 1; i-- > 0;) {
            d[i] -= cprime_[i] * d[i + 1];
            base[(i + 1) * stride] = d[i];
        }
        base[0] = 0.0;
        base[(m + 1) * stride] = 0.0;
    }

    Grid grid_;
    double mu_cached_ = -1.0;
    double off_ = 0.0;
    std::vector<double> cprime_;
    std::vector<double> inv_denom_;
    std::vector<double> scratch_;
};

// Shared method-of-lines loop. reaction(u, t) is the pointwise drift at the
// step's left endpoint; noise(t0, t1) the spatially constant increment over
// the step. Adaptive halving engages near the blowup threshold (sup-norm
// growth above 20% per step) down to dt / 2^16, after which the step is
// accepted and the threshold check decides.
template <class Reaction, class Noise>
SolveOutcome run_stepper(const PdeModel& model, const InitialDatum& u0, const SolverSpec& spec,
                         Reaction&& reaction, Noise&& noise) {
    model.validate();
    spec.validate();
    const Grid grid = model.make_grid(spec.n_nodes);
    const double h = grid.h();
    if (spec.scheme == SolverSpec::Scheme::explicit_euler &&
        spec.dt > h * h / (2.0 * grid.d) * (1.0 + 1e-12)) {
        throw ConfigurationError("SolverSpec: explicit scheme violates dt <= h^2/(2d)");
    }

    ScalarField state = ScalarField::sample(grid, u0);
    const double threshold = spec.threshold_for(u0);
    const double dt_min = spec.dt / 65536.0;

    SolveOutcome out;
    out.field.grid = grid;
    if (spec.record_trace) out.supnorm_trace.emplace_back(0.0, state.sup_norm());

    DiffusionSolver diffusion(grid);
    std::vector<double> next(state.values.size());
    double t = 0.0;
    double dt_cur = spec.dt;
    double sup_prev = state.sup_norm();
    double min_seen = state.min_value();

    while (t < spec.horizon - 1e-12 * spec.horizon) {
        const double dt = std::min(dt_cur, spec.horizon - t);
        const double t_next = t + dt;
        const double inc = noise(t, t_next);
        const std::size_t n_total = state.values.size();

        for (std::size_t i = 0; i < n_total; ++i)
            next[i] = state.values[i] + dt * reaction(state.values[i], t) + inc;
        if (spec.scheme == SolverSpec::Scheme::semi_implicit) {
            zero_boundary(grid, next);
            diffusion.apply_inverse(next, dt / (h * h));
        } else {
            diffusion.add_explicit_laplacian(state.values, next, dt / (h * h));
            zero_boundary(grid, next);
        }

        double sup_new = 0.0;
        double min_new = next.empty() ? 0.0 : next.front();
        for (double v : next) {
            sup_new = std::max(sup_new, std::fabs(v));
            min_new = std::min(min_new, v);
        }

        const bool lost_finiteness = !std::isfinite(sup_new);
        const bool steep = sup_new > 1.2 * sup_prev && sup_new > 1e-3 * threshold;
        if (spec.adaptive && (lost_finiteness || steep) && dt > dt_min) {
            dt_cur = 0.5 * dt;
            continue;  // retry the same step
        }

        state.values.swap(next);
        t = t_next;
        sup_prev = sup_new;
        min_seen = std::min(min_seen, min_new);
        if (spec.record_trace) out.supnorm_trace.emplace_back(t, sup_new);

        if (lost_finiteness || sup_new > threshold) {
            out.status = SolveOutcome::Status::blewup;
            out.t_b = t;
            out.final_time = t;
            out.min_nodal = min_seen;
            out.field.values = std::move(state.values);
            return out;
        }
        if (dt_cur < spec.dt) dt_cur = std::min(spec.dt, 2.0 * dt_cur);
    }

    out.status = SolveOutcome::Status::completed;
    out.final_time = spec.horizon;
    out.min_nodal = min_seen;
    out.field.values = std::move(state.values);
    return out;
}

inline void require_path_compatible(const BrownianPath& path, const SolverSpec& spec) {
    if (path.n_steps() == 0) throw ConfigurationError("solver: empty Brownian path");
    if (path.horizon() < spec.horizon * (1.0 - 1e-9))
        throw ConfigurationError("solver: path horizon shorter than the solve horizon");
    const double ratio = path.dt > spec.dt ? path.dt / spec.dt : spec.dt / path.dt;
    if (std::fabs(ratio - static_cast<double>(std::llround(ratio))) > 1e-9)
        throw ConfigurationError("solver: path dt and solver dt must divide one another");
}

} // namespace detail

// Deterministic reaction-diffusion solve of u_t = Lap u + f(u).
inline SolveOutcome solve_deterministic(const PdeModel& model, const InitialDatum& u0,
                                        const SolverSpec& spec) {
    if (model.noise_kind != PdeModel::NoiseKind::none)
        throw ConfigurationError("solve_deterministic: model must be noise-free");
    const Drift drift = model.drift;
    return detail::run_stepper(
        model, u0, spec, [&drift](double u, double) { return drift(u); },
        [](double, double) { return 0.0; });
}

// Pathwise solve of the transformed multiplicative-noise equation
//   w_t = Lap w + e^{-xi(t)} f(e^{xi(t)} w),  xi(t) = sigma B_t - sigma^2 t/2,
// with the random coefficient frozen at each step's left endpoint. The
// exponential factor folds into the drift exactly for every supported kind,
// so nothing here can overflow before the field itself does. Returns the
// outcome in w variables; reconstruct_u maps back to u.
inline SolveOutcome solve_random_multiplicative(const PdeModel& model, const InitialDatum& u0,
                                                const BrownianPath& path, const SolverSpec& spec) {
    if (model.noise_kind != PdeModel::NoiseKind::multiplicative)
        throw ConfigurationError("solve_random_multiplicative: model noise must be multiplicative");
    detail::require_path_compatible(path, spec);
    const double sigma = model.noise_amp;
    const Drift drift = model.drift;
    double growth = 0.0;  // exponent applied to xi by the drift kind
    switch (drift.kind) {
        case Drift::Kind::linear: growth = 0.0; break;
        case Drift::Kind::power: growth = drift.p - 1.0; break;
        case Drift::Kind::bounded_G: growth = drift.beta; break;
    }
    auto reaction = [&path, &drift, sigma, growth](double w, double t) {
        const double xi = sigma * path.interpolate(t) - 0.5 * sigma * sigma * t;
        return std::exp(growth * xi) * drift(w);
    };
    return detail::run_stepper(model, u0, spec, reaction, [](double, double) { return 0.0; });
}

// Pathwise solve of the additive-noise equation du = (Lap u + f(u)) dt
// + sigma dB_t; the noise enters as the exact spatially constant increment
// of the path over each step.
inline SolveOutcome solve_random_additive(const PdeModel& model, const InitialDatum& u0,
                                          const BrownianPath& path, const SolverSpec& spec) {
    if (model.noise_kind != PdeModel::NoiseKind::additive)
        throw ConfigurationError("solve_random_additive: model noise must be additive");
    detail::require_path_compatible(path, spec);
    const double sigma = model.noise_amp;
    const Drift drift = model.drift;
    return detail::run_stepper(
        model, u0, spec, [&drift](double u, double) { return drift(u); },
        [&path, sigma](double t0, double t1) {
            return sigma * (path.interpolate(t1) - path.interpolate(t0));
        });
}

// Invert the exponential transformation: u = e^{sigma B_t - sigma^2 t/2} w.
inline ScalarField reconstruct_u(const ScalarField& w, const BrownianPath& path, double sigma,
                                 double t) {
    const double factor = std::exp(sigma * path.value_at(t) - 0.5 * sigma * sigma * t);
    ScalarField u = w;
    for (double& v : u.values) v *= factor;
    return u;
}

// Exact mild solution of the linear additive-noise heat equation:
// u(x,t) = (K(t) * u0)(x) + sigma B_t.
inline double additive_exact_solution(const InitialDatum& u0, double sigma, double t,
                                      const KernelQuery& x, const BrownianPath& path,
                                      const QuadratureSpec& quad = {}) {
    return convolve_initial(u0, t, x, quad) + sigma * path.value_at(t);
}

// Event {u <= v} of the stochastic-vs-deterministic comparison.
inline bool comparison_event(double u_sample, double v_det) { return u_sample <= v_det; }

// Pairing of a field with the heat kernel at time t: G(t) = integral of
// K(t, x) w(x) dx over the grid.
inline double eigen_pairing_kernel(const ScalarField& w, double t) {
    if (w.grid.d == 1) {
        return pair_with(w, [t](double x) { return heat_kernel_value({x, 0.0, t, 1}); });
    }
    return pair_with(w, [t](double x, double y) { return heat_kernel_value({x, y, t, 2}); });
}

} // namespace blowlab
