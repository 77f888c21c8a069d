#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blowlab/additive_formulas.hpp"
#include "blowlab/blowup_bounds.hpp"
#include "blowlab/brownian.hpp"
#include "blowlab/heat_kernel.hpp"
#include "blowlab/parallel.hpp"
#include "blowlab/pde_checks.hpp"
#include "blowlab/pde_solver.hpp"

namespace blowlab {

struct MCEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
    double ci_level = 0.997;  // ~3 sigma
    std::uint64_t master_seed = 0;
};

// Indicator estimand: mean in [0,1], stderr = sqrt(mean (1-mean) / n).
inline MCEstimate estimate_from_indicators(const std::vector<char>& hits,
                                           std::uint64_t master_seed) {
    MCEstimate e;
    e.n = hits.size();
    e.master_seed = master_seed;
    if (hits.empty()) return e;
    std::vector<double> as_double(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) as_double[i] = hits[i] ? 1.0 : 0.0;
    e.mean = pairwise_sum(as_double) / static_cast<double>(e.n);
    e.stderr_ = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(e.n));
    return e;
}

inline MCEstimate estimate_from_values(const std::vector<double>& values,
                                       std::uint64_t master_seed) {
    MCEstimate e;
    e.n = values.size();
    e.master_seed = master_seed;
    if (values.empty()) return e;
    e.mean = pairwise_sum(values) / static_cast<double>(e.n);
    if (e.n > 1) {
        std::vector<double> sq(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double d = values[i] - e.mean;
            sq[i] = d * d;
        }
        const double var = pairwise_sum(sq) / static_cast<double>(e.n - 1);
        e.stderr_ = std::sqrt(var / static_cast<double>(e.n));
    }
    return e;
}

struct Verdict {
    bool pass = false;
    double margin = 0.0;  // |delta| - 3 stderr - bias; <= 0 iff pass
    std::string note;
};

// Acceptance harness for analytic-vs-MC agreement: PASS iff the absolute
// difference sits inside 3 standard errors plus the declared bias budget.
inline Verdict two_sided_bound_check(double analytic_value, const MCEstimate& estimate,
                                     double bias_budget = 0.0) {
    Verdict v;
    const double delta = std::fabs(analytic_value - estimate.mean);
    v.margin = delta - 3.0 * estimate.stderr_ - bias_budget;
    v.pass = v.margin <= 0.0;
    if (estimate.stderr_ == 0.0 && delta > bias_budget) {
        v.pass = false;
        v.note = "degenerate variance: stderr = 0 with a mismatch";
    }
    return v;
}

// ---------------------------------------------------------------------------
// Blowup-time survival estimate (bounded domain, multiplicative noise).
// ---------------------------------------------------------------------------

// The tau threshold appears in the source material both as (1/beta) u(phi,0)
// and as (1/beta) u(phi,0)^{-beta}; both are exposed.
enum class ThresholdChoice { pairing, pairing_pow_neg_beta };

inline double tau_threshold(const BoundedDomainParams& params, ThresholdChoice choice) {
    params.validate();
    if (!(params.u_phi_0 > 0.0))
        throw ConfigurationError("tau_threshold: u_phi_0 must be > 0");
    return choice == ThresholdChoice::pairing
               ? params.u_phi_0 / params.beta
               : std::pow(params.u_phi_0, -params.beta) / params.beta;
}

struct TauSurvivalResult {
    bool defined = false;  // false when the deterministic blowup time is infinite
    double tstar = 0.0;
    double functional_cap = 0.0;  // (1 - e^{-lambda1 beta T*}) / (lambda1 beta)
    MCEstimate estimate;          // P(tau > T*)
    std::size_t route_mismatches = 0;  // tau-route vs functional-route disagreements
};

// Estimates P(tau > T*) as the fraction of paths whose exponential
// functional over [0, T*] stays below the deterministic cap. The direct
// hitting-time route is evaluated on the same running sums and must agree
// path by path; disagreements are counted, not hidden.
inline TauSurvivalResult estimate_p_tau_gt_Tstar(const BoundedDomainParams& params,
                                                 ThresholdChoice choice, std::size_t n_paths,
                                                 double dt, std::uint64_t master_seed,
                                                 unsigned workers = 1) {
    if (!(dt > 0.0)) throw ConfigurationError("estimate_p_tau_gt_Tstar: dt must be > 0");
    if (n_paths == 0) throw ConfigurationError("estimate_p_tau_gt_Tstar: n_paths must be >= 1");
    const double threshold = tau_threshold(params, choice);
    TauSurvivalResult result;
    const auto tstar = deterministic_Tstar(params, threshold);
    if (!tstar) return result;  // deterministic solution is global: experiment undefined
    result.defined = true;
    result.tstar = *tstar;
    const double lb = params.lambda1 * params.beta;
    result.functional_cap = (1.0 - std::exp(-lb * result.tstar)) / lb;

    const auto n_steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(result.tstar / dt)));
    const double drift = -(params.lambda1 + 0.5 * params.kappa * params.kappa) * params.beta;
    const double diffusion = params.kappa * params.beta;

    std::vector<char> survived(n_paths, 0);
    std::vector<char> mismatch(n_paths, 0);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        const BrownianPath path = sample_path(result.tstar, n_steps, {master_seed, i});
        const auto run =
            exp_functional_with_tau(path, drift, diffusion, result.functional_cap);
        const bool func_survives = run.integral < result.functional_cap;
        const bool tau_survives = !run.tau.has_value();  // horizon is exactly T*
        survived[i] = func_survives ? 1 : 0;
        mismatch[i] = func_survives != tau_survives ? 1 : 0;
    });

    result.estimate = estimate_from_indicators(survived, master_seed);
    for (char m : mismatch) result.route_mismatches += m;
    return result;
}

// ---------------------------------------------------------------------------
// Named estimands.
// ---------------------------------------------------------------------------

enum class Estimand {
    positivity,
    interval,
    comparison,
    tau_survival,
    exp_event,
    mean_field,
    supersolution,
    sublinear_global,
};

struct EstimatorSpec {
    Estimand estimand = Estimand::positivity;
    std::size_t n_paths = 10000;

    // Additive-noise point estimands (positivity / interval / mean_field).
    InitialDatum u0 = InitialDatum::constant(0.0);
    int dimension = 1;
    double sigma = 1.0;
    double t = 1.0;
    std::vector<double> eval_x = {0.0};
    QuadratureSpec quad;
    double interval_a = -1.0;
    double interval_b = 1.0;

    // Comparison (linear drift) and the PDE-backed estimands.
    PdeModel model;
    SolverSpec solver;
    double t_check = 0.0;  // supersolution comparison time (0: solver horizon)
    double bias_budget = 0.0;

    // exp_event: indicator of e^{-(p-1) s^2 t/2 + (p-1) s B_t} > eps.
    double p = 2.0;
    double epsilon = 0.01;
    double t_eval = 1.0;

    // tau_survival.
    BoundedDomainParams bounded{0.5, 1.0, 1.0, 0.5, 1.0};
    ThresholdChoice threshold_choice = ThresholdChoice::pairing;
    double tau_dt = 0.0;  // 0: 1e-3 * T*
};

struct NodeEstimate {
    double x = 0.0;
    MCEstimate estimate;
};

struct EstimatorOutput {
    MCEstimate primary;
    std::vector<std::pair<std::string, MCEstimate>> extras;
    std::vector<NodeEstimate> nodes;          // mean_field
    std::optional<TauSurvivalResult> tau;     // tau_survival
    std::optional<FieldComparisonReport> field_report;  // supersolution / sublinear
};

// Deterministic given (spec, master_seed) for any worker count: every path
// writes its own slot and reductions run in path-index order.
inline EstimatorOutput run_estimator(const EstimatorSpec& spec, std::uint64_t master_seed,
                                     unsigned workers = 1) {
    if (spec.n_paths == 0) throw ConfigurationError("run_estimator: n_paths must be >= 1");
    EstimatorOutput out;
    switch (spec.estimand) {
        case Estimand::positivity:
        case Estimand::interval: {
            if (!(spec.sigma > 0.0)) throw ConfigurationError("run_estimator: sigma must be > 0");
            if (!(spec.t > 0.0)) throw ConfigurationError("run_estimator: t must be > 0");
            if (spec.estimand == Estimand::interval && !(spec.interval_a < spec.interval_b))
                throw ConfigurationError("run_estimator: interval needs a < b");
            const KernelQuery q{spec.eval_x.at(0), 0.0, spec.t, spec.dimension};
            const double conv = convolve_initial(spec.u0, spec.t, q, spec.quad);
            std::vector<char> hits(spec.n_paths, 0);
            parallel_for(spec.n_paths, workers, [&](std::size_t i) {
                const BrownianPath path = sample_path(spec.t, 1, {master_seed, i});
                const double u = conv + spec.sigma * path.values.back();
                const bool hit = spec.estimand == Estimand::positivity
                                     ? u > 0.0
                                     : (spec.interval_a < u && u <= spec.interval_b);
                hits[i] = hit ? 1 : 0;
            });
            out.primary = estimate_from_indicators(hits, master_seed);
            return out;
        }
        case Estimand::mean_field: {
            if (!(spec.sigma > 0.0)) throw ConfigurationError("run_estimator: sigma must be > 0");
            std::vector<double> conv(spec.eval_x.size());
            for (std::size_t j = 0; j < spec.eval_x.size(); ++j) {
                conv[j] = convolve_initial(spec.u0, spec.t,
                                           {spec.eval_x[j], 0.0, spec.t, spec.dimension},
                                           spec.quad);
            }
            std::vector<double> noise(spec.n_paths);
            parallel_for(spec.n_paths, workers, [&](std::size_t i) {
                noise[i] = sample_path(spec.t, 1, {master_seed, i}).values.back();
            });
            for (std::size_t j = 0; j < spec.eval_x.size(); ++j) {
                std::vector<double> samples(spec.n_paths);
                for (std::size_t i = 0; i < spec.n_paths; ++i)
                    samples[i] = conv[j] + spec.sigma * noise[i];
                out.nodes.push_back({spec.eval_x[j], estimate_from_values(samples, master_seed)});
            }
            if (!out.nodes.empty()) out.primary = out.nodes.front().estimate;
            return out;
        }
        case Estimand::comparison: {
            PdeModel model = spec.model;
            if (model.noise_kind != PdeModel::NoiseKind::additive)
                throw ConfigurationError("run_estimator: comparison needs additive noise");
            PdeModel det = model;
            det.noise_kind = PdeModel::NoiseKind::none;
            det.noise_amp = 0.0;
            const SolveOutcome v = solve_deterministic(det, spec.u0, spec.solver);
            if (v.blew_up())
                throw ConfigurationError("run_estimator: deterministic comparison solve blew up");
            const std::size_t node = v.field.grid.index_of(spec.eval_x.at(0));
            const double v_det = v.field.values[node];
            const auto n_steps = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(spec.solver.horizon / spec.solver.dt)));
            std::vector<char> hits(spec.n_paths, 0);
            std::vector<double> diffs(spec.n_paths, 0.0);
            parallel_for(spec.n_paths, workers, [&](std::size_t i) {
                const BrownianPath path =
                    sample_path(spec.solver.horizon, n_steps, {master_seed, i});
                const SolveOutcome u = solve_random_additive(model, spec.u0, path, spec.solver);
                const double u_val = u.field.values[node];
                hits[i] = comparison_event(u_val, v_det) ? 1 : 0;
                diffs[i] = u_val - v_det;
            });
            out.primary = estimate_from_indicators(hits, master_seed);
            out.extras.emplace_back("mean_u_minus_v", estimate_from_values(diffs, master_seed));
            return out;
        }
        case Estimand::exp_event: {
            if (spec.sigma == 0.0)
                throw ConfigurationError("run_estimator: exp_event needs sigma != 0");
            if (!(spec.t_eval > 0.0))
                throw ConfigurationError("run_estimator: exp_event needs t_eval > 0");
            std::vector<char> hits(spec.n_paths, 0);
            parallel_for(spec.n_paths, workers, [&](std::size_t i) {
                const BrownianPath path = sample_path(spec.t_eval, 1, {master_seed, i});
                hits[i] = event_exp_exceeds(path, spec.p, spec.sigma, spec.epsilon, spec.t_eval)
                              ? 1
                              : 0;
            });
            out.primary = estimate_from_indicators(hits, master_seed);
            return out;
        }
        case Estimand::tau_survival: {
            const double dt_default = 1e-3;
            double dt = spec.tau_dt;
            if (dt <= 0.0) {
                const auto tstar =
                    deterministic_Tstar(spec.bounded,
                                        tau_threshold(spec.bounded, spec.threshold_choice));
                dt = tstar ? dt_default * *tstar : dt_default;
            }
            out.tau = estimate_p_tau_gt_Tstar(spec.bounded, spec.threshold_choice, spec.n_paths,
                                              dt, master_seed, workers);
            if (out.tau->defined) out.primary = out.tau->estimate;
            return out;
        }
        case Estimand::supersolution: {
            const double t_check = spec.t_check > 0.0 ? spec.t_check : spec.solver.horizon;
            out.field_report =
                supersolution_check(spec.model, spec.u0, spec.solver, spec.n_paths, t_check,
                                    master_seed, workers, spec.bias_budget);
            return out;
        }
        case Estimand::sublinear_global: {
            const Drift& drift = spec.model.drift;
            if (drift.kind != Drift::Kind::power)
                throw ConfigurationError("run_estimator: sublinear_global needs a power drift");
            out.field_report = sublinear_global_check(
                drift.k, drift.p, spec.model.noise_amp, spec.u0, spec.model, spec.solver,
                spec.n_paths, master_seed, workers, spec.bias_budget);
            return out;
        }
    }
    throw ConfigurationError("run_estimator: unknown estimand");
}

} // namespace blowlab
