#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blowlab/additive_formulas.hpp"
#include "blowlab/blowup_bounds.hpp"
#include "blowlab/config.hpp"
#include "blowlab/mc.hpp"
#include "blowlab/quadrature.hpp"
#include "blowlab/report.hpp"

namespace blowlab {

// Experiment families, used by the CLI to gate which subcommand may run
// which experiment.
enum ExperimentFamily : unsigned {
    kFamilyAnalytic = 1u,
    kFamilyAdditive = 2u,
    kFamilyMultiplicative = 4u,
    kFamilyBlowupTime = 8u,
};

struct ExperimentOutput {
    JsonValue analytic = JsonValue::object();
    JsonValue estimates = JsonValue::object();
    JsonValue checks = JsonValue::object();
    CsvTable table{{"metric", "value"}};
    std::optional<CsvTable> plot;
    std::optional<CsvTable> trace;
    bool all_pass = true;
    std::string headline_name = "value";
    double headline = 0.0;
};

namespace detail {

inline const char* pass_str(bool ok) { return ok ? "PASS" : "FAIL"; }

inline JsonValue json_of(const MCEstimate& e) {
    JsonValue j = JsonValue::object();
    j.set("mean", e.mean);
    j.set("stderr", e.stderr_);
    j.set("n", e.n);
    j.set("ci_level", e.ci_level);
    return j;
}

inline void add_check(ExperimentOutput& out, const std::string& name, bool pass,
                      double margin = 0.0, const std::string& note = "") {
    JsonValue j = JsonValue::object();
    j.set("pass", pass);
    j.set("margin", margin);
    if (!note.empty()) j.set("note", note);
    out.checks.set(name, std::move(j));
    out.all_pass = out.all_pass && pass;
}

inline void add_check(ExperimentOutput& out, const std::string& name, const Verdict& v) {
    add_check(out, name, v.pass, v.margin, v.note);
}

inline InitialDatum u0_from_config(RunConfig& cfg) {
    const std::string kind = cfg.get_string("u0.kind", "gaussian_bump");
    if (kind == "gaussian_bump")
        return InitialDatum::gaussian_bump(cfg.get_double("u0.c", 1.0),
                                           cfg.get_double("u0.k", 1.0));
    if (kind == "constant") return InitialDatum::constant(cfg.get_double("u0.c", 1.0));
    if (kind == "indicator_ball")
        return InitialDatum::indicator_ball(cfg.get_double("u0.c", 1.0),
                                            cfg.get_double("u0.radius", 1.0));
    if (kind == "tabulated")
        return InitialDatum::tabulated(cfg.get_double_list("u0.xs"),
                                       cfg.get_double_list("u0.values"));
    throw ConfigurationError("key 'u0.kind': unknown initial datum kind '" + kind + "'");
}

inline SolverSpec::Scheme scheme_from_config(RunConfig& cfg) {
    const std::string s = cfg.get_string("solver.scheme", "semi_implicit");
    if (s == "semi_implicit") return SolverSpec::Scheme::semi_implicit;
    if (s == "explicit") return SolverSpec::Scheme::explicit_euler;
    throw ConfigurationError("key 'solver.scheme': expected semi_implicit or explicit, got '" +
                             s + "'");
}

inline double lambda1_from_config(RunConfig& cfg) {
    if (cfg.has("domain.L")) {
        const double L = cfg.get_double("domain.L");
        return first_eigenpair(L).lambda1;
    }
    return cfg.get_double("domain.lambda1", 1.0);
}

// Quadrature-based bias allowance for estimands whose only systematic error
// is the kernel convolution.
inline constexpr double kQuadratureBias = 1e-8;

// ---------------------------------------------------------------------------
// Additive-noise experiments (whole space, exact solution available).
// ---------------------------------------------------------------------------

inline ExperimentOutput run_positivity(RunConfig& cfg, unsigned workers, std::uint64_t seed) {
    EstimatorSpec spec;
    spec.estimand = Estimand::positivity;
    spec.u0 = u0_from_config(cfg);
    spec.dimension = static_cast<int>(cfg.get_double("model.dimension", 1));
    spec.sigma = cfg.get_double("model.sigma", 1.0);
    spec.t = cfg.get_double("eval.t", 1.0);
    spec.eval_x = {cfg.get_double("eval.x", 0.0)};
    spec.n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 100000));
    if (!(spec.sigma > 0.0)) throw ConfigurationError("key 'model.sigma': must be > 0");
    if (!(spec.t > 0.0)) throw ConfigurationError("key 'eval.t': must be > 0");

    const KernelQuery q{spec.eval_x[0], 0.0, spec.t, spec.dimension};
    const double A = offset_A(spec.u0, spec.t, q, spec.quad);
    const AdditiveNoiseParams params{spec.sigma, spec.t, A};
    const double analytic = positivity_probability(params);

    const EstimatorOutput mc = run_estimator(spec, seed, workers);
    const Verdict verdict = two_sided_bound_check(analytic, mc.primary, kQuadratureBias);

    ExperimentOutput out;
    out.analytic.set("offset_A", A);
    out.analytic.set("positivity_probability", analytic);
    out.estimates.set("mc_positivity", json_of(mc.primary));
    add_check(out, "analytic_vs_mc", verdict);
    out.table = CsvTable({"x", "t", "analytic_p", "mc_p", "stderr", "verdict"});
    out.table.new_row()
        .add(spec.eval_x[0])
        .add(spec.t)
        .add(analytic)
        .add(mc.primary.mean)
        .add(mc.primary.stderr_)
        .add(pass_str(verdict.pass));
    out.headline_name = "mc_positivity";
    out.headline = mc.primary.mean;
    return out;
}

inline ExperimentOutput run_interval(RunConfig& cfg, unsigned workers, std::uint64_t seed) {
    EstimatorSpec spec;
    spec.estimand = Estimand::interval;
    spec.u0 = u0_from_config(cfg);
    spec.dimension = static_cast<int>(cfg.get_double("model.dimension", 1));
    spec.sigma = cfg.get_double("model.sigma", 1.0);
    spec.t = cfg.get_double("eval.t", 1.0);
    spec.eval_x = {cfg.get_double("eval.x", 0.0)};
    spec.interval_a = cfg.get_double("interval.a", -1.0);
    spec.interval_b = cfg.get_double("interval.b", 1.0);
    spec.n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 100000));
    if (!(spec.interval_a < spec.interval_b))
        throw ConfigurationError("key 'interval.a': must be below interval.b");

    const KernelQuery q{spec.eval_x[0], 0.0, spec.t, spec.dimension};
    const double A = offset_A(spec.u0, spec.t, q, spec.quad);
    const AdditiveNoiseParams params{spec.sigma, spec.t, A};
    const double analytic = interval_probability(spec.interval_a, spec.interval_b, params);

    const EstimatorOutput mc = run_estimator(spec, seed, workers);
    const Verdict verdict = two_sided_bound_check(analytic, mc.primary, kQuadratureBias);

    ExperimentOutput out;
    out.analytic.set("offset_A", A);
    out.analytic.set("interval_probability", analytic);
    out.estimates.set("mc_interval", json_of(mc.primary));
    add_check(out, "analytic_vs_mc", verdict);
    out.table = CsvTable({"x", "t", "a", "b", "analytic_p", "mc_p", "stderr", "verdict"});
    out.table.new_row()
        .add(spec.eval_x[0])
        .add(spec.t)
        .add(spec.interval_a)
        .add(spec.interval_b)
        .add(analytic)
        .add(mc.primary.mean)
        .add(mc.primary.stderr_)
        .add(pass_str(verdict.pass));
    out.headline_name = "mc_interval";
    out.headline = mc.primary.mean;
    return out;
}

inline ExperimentOutput run_rate(RunConfig& cfg, unsigned, std::uint64_t) {
    const double A = cfg.get_double("rate.A", -1.0);
    const double t = cfg.get_double("eval.t", 1.0);
    std::vector<double> sigmas = {0.5, 0.2, 0.1, 0.05};
    if (cfg.has("rate.sigmas")) sigmas = cfg.get_double_list("rate.sigmas");
    if (!(A < 0.0)) throw ConfigurationError("key 'rate.A': must be < 0");

    ExperimentOutput out;
    out.table = CsvTable({"sigma", "tail", "reference", "log_ratio"});
    out.plot = CsvTable({"sigma", "log_ratio"});
    std::vector<double> ratios;
    JsonValue rows = JsonValue::object();
    for (double sigma : sigmas) {
        const auto rate = vanishing_noise_rate({sigma, t, A});
        const double ratio = std::log(rate.tail) / std::log(rate.reference);
        ratios.push_back(ratio);
        out.table.new_row().add(sigma).add(rate.tail).add(rate.reference).add(ratio);
        out.plot->new_row().add(sigma).add(ratio);
        rows.set("sigma_" + format_number(sigma), ratio);
    }
    out.analytic.set("log_ratio", std::move(rows));

    bool monotone = true;
    for (std::size_t i = 0; i + 1 < ratios.size(); ++i)
        monotone = monotone && ratios[i + 1] < ratios[i] && ratios[i + 1] >= 1.0;
    add_check(out, "ratio_monotone_toward_1", monotone,
              ratios.empty() ? 0.0 : ratios.back() - 1.0);
    const bool close = !ratios.empty() && std::fabs(ratios.back() - 1.0) <= 0.10;
    add_check(out, "final_ratio_within_10pct", close,
              ratios.empty() ? 0.0 : std::fabs(ratios.back() - 1.0) - 0.10);
    out.headline_name = "log_ratio";
    out.headline = ratios.empty() ? 0.0 : ratios.back();
    return out;
}

inline ExperimentOutput run_mean_field(RunConfig& cfg, unsigned workers, std::uint64_t seed) {
    EstimatorSpec spec;
    spec.estimand = Estimand::mean_field;
    spec.u0 = u0_from_config(cfg);
    spec.dimension = static_cast<int>(cfg.get_double("model.dimension", 1));
    spec.sigma = cfg.get_double("model.sigma", 1.0);
    spec.t = cfg.get_double("eval.t", 1.0);
    spec.eval_x = cfg.has("eval.xs") ? cfg.get_double_list("eval.xs")
                                     : std::vector<double>{0.0, 0.5, 1.0};
    spec.n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 20000));

    const EstimatorOutput mc = run_estimator(spec, seed, workers);

    ExperimentOutput out;
    out.table = CsvTable({"x", "analytic_mean", "mc_mean", "stderr", "verdict"});
    bool all = true;
    for (const auto& node : mc.nodes) {
        const double analytic = convolve_initial(
            spec.u0, spec.t, {node.x, 0.0, spec.t, spec.dimension}, spec.quad);
        const Verdict v = two_sided_bound_check(analytic, node.estimate, kQuadratureBias);
        all = all && v.pass;
        out.table.new_row()
            .add(node.x)
            .add(analytic)
            .add(node.estimate.mean)
            .add(node.estimate.stderr_)
            .add(pass_str(v.pass));
    }
    add_check(out, "mean_matches_heat_solution", all);
    out.headline_name = "mc_mean_at_first_node";
    out.headline = mc.nodes.empty() ? 0.0 : mc.nodes.front().estimate.mean;
    return out;
}

inline ExperimentOutput run_comparison(RunConfig& cfg, unsigned workers, std::uint64_t seed) {
    EstimatorSpec spec;
    spec.estimand = Estimand::comparison;
    spec.u0 = u0_from_config(cfg);
    const double t = cfg.get_double("eval.t", 0.5);
    const double x = cfg.get_double("eval.x", 0.0);
    spec.eval_x = {x};
    spec.n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 100000));

    PdeModel model;
    model.dimension = static_cast<int>(cfg.get_double("model.dimension", 1));
    model.drift = Drift::linear(cfg.get_double("model.k", 1.0));
    model.noise_kind = PdeModel::NoiseKind::additive;
    model.noise_amp = cfg.get_double("model.sigma", 1.0);
    model.extent = cfg.get_double("model.extent", default_truncation_radius(spec.u0, t));
    spec.model = model;

    SolverSpec solver;
    solver.horizon = t;
    solver.dt = cfg.get_double("solver.dt", t / 100.0);
    solver.n_nodes = static_cast<std::size_t>(cfg.get_double("solver.n_nodes", 201));
    solver.scheme = scheme_from_config(cfg);
    spec.solver = solver;

    const EstimatorOutput mc = run_estimator(spec, seed, workers);
    const Verdict v_freq = two_sided_bound_check(0.5, mc.primary);
    const Verdict v_mean = two_sided_bound_check(0.0, mc.extras.at(0).second);

    ExperimentOutput out;
    out.analytic.set("prob_u_le_v", 0.5);
    out.analytic.set("mean_u_minus_v", 0.0);
    out.estimates.set("mc_prob_u_le_v", json_of(mc.primary));
    out.estimates.set("mc_mean_u_minus_v", json_of(mc.extras.at(0).second));
    add_check(out, "frequency_is_half", v_freq);
    add_check(out, "mean_difference_is_zero", v_mean);
    out.table = CsvTable({"metric", "analytic", "mc", "stderr", "verdict"});
    out.table.new_row()
        .add("prob_u_le_v")
        .add(0.5)
        .add(mc.primary.mean)
        .add(mc.primary.stderr_)
        .add(pass_str(v_freq.pass));
    out.table.new_row()
        .add("mean_u_minus_v")
        .add(0.0)
        .add(mc.extras.at(0).second.mean)
        .add(mc.extras.at(0).second.stderr_)
        .add(pass_str(v_mean.pass));
    out.headline_name = "mc_prob_u_le_v";
    out.headline = mc.primary.mean;
    return out;
}

inline ExperimentOutput run_jensen(RunConfig& cfg, unsigned, std::uint64_t) {
    const InitialDatum u0 = u0_from_config(cfg);
    const int p = static_cast<int>(cfg.get_double("model.p", 2));
    const double k = cfg.get_double("model.k", 1.0);
    const double sigma = cfg.get_double("model.sigma", 1.0);
    const double t = cfg.get_double("eval.t", 1.0);
    const double x = cfg.get_double("eval.x", 0.0);
    const int d = static_cast<int>(cfg.get_double("model.dimension", 1));

    const double A = offset_A(u0, t, {x, 0.0, t, d});
    const SignBound bound = jensen_sign_bound(p, k, {sigma, t, A});

    ExperimentOutput out;
    const char* direction =
        bound.direction == SignDirection::nonnegative ? "nonnegative" : "nonpositive";
    out.analytic.set("offset_A", A);
    out.analytic.set("direction", direction);
    out.analytic.set("bound", bound.bound);
    add_check(out, "bound_is_probability", bound.bound >= 0.0 && bound.bound <= 1.0);
    out.table = CsvTable({"p", "k", "direction", "bound"});
    out.table.new_row().add(std::size_t(p)).add(k).add(direction).add(bound.bound);
    out.headline_name = "bound";
    out.headline = bound.bound;
    return out;
}

inline ExperimentOutput run_sublinear(RunConfig& cfg, unsigned workers, std::uint64_t seed) {
    const InitialDatum u0 = cfg.has("u0.kind") || cfg.has("u0.c") || cfg.has("u0.k")
                                ? u0_from_config(cfg)
                                : InitialDatum::gaussian_bump(4.0, 1.0 / 16.0);
    const double k = cfg.get_double("model.k", 1.0);
    const double p = cfg.get_double("model.p", 0.5);
    const double sigma = cfg.get_double("model.sigma", 1.0);
    const double horizon = cfg.get_double("model.horizon", 2.0);
    const std::size_t n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 1000));

    PdeModel model;
    model.dimension = 1;
    model.extent = cfg.get_double("model.extent", default_truncation_radius(u0, horizon));
    SolverSpec solver;
    solver.horizon = horizon;
    solver.dt = cfg.get_double("solver.dt", 2e-3);
    solver.n_nodes = static_cast<std::size_t>(cfg.get_double("solver.n_nodes", 301));
    solver.scheme = scheme_from_config(cfg);
    const double bias = cfg.get_double("mc.bias_budget", 10.0 * solver.dt * (1.0 + u0.sup_norm()));
    // The lower-solution claim concerns the region where the solution keeps
    // its sign; where the deterministic reference sits below the noise
    // scale, |u| is dominated by the Gaussian part and the ordering reverses
    // (Jensen). Nodes below the floor are reported but not gated on.
    const double floor = cfg.get_double("mc.check_floor", 3.0 * sigma * std::sqrt(horizon));

    FieldComparisonReport report = sublinear_global_check(k, p, sigma, u0, model, solver, n_paths,
                                                          seed, workers, bias);

    ExperimentOutput out;
    std::size_t checked = 0;
    double worst = std::numeric_limits<double>::infinity();
    bool inequality_ok = true;
    if (!report.reference.empty()) {
        out.plot = CsvTable({"x", "mc_mean_abs_u", "stderr", "v_det"});
        const Grid grid = model.make_grid(solver.n_nodes);
        for (std::size_t j = 0; j < report.reference.size(); ++j) {
            out.plot->new_row()
                .add(grid.node(j))
                .add(report.mean[j])
                .add(report.stderr_[j])
                .add(report.reference[j]);
            if (report.reference[j] < floor) continue;
            ++checked;
            const double slack =
                report.reference[j] + 3.0 * report.stderr_[j] + bias - report.mean[j];
            worst = std::min(worst, slack);
            inequality_ok = inequality_ok && slack >= 0.0;
        }
    }
    const bool no_blowups = report.blowup_paths == 0;
    add_check(out, "zero_blowups", no_blowups, static_cast<double>(report.blowup_paths));
    add_check(out, "mean_abs_u_below_majorant", inequality_ok && checked > 0,
              checked > 0 ? worst : 0.0,
              checked > 0 ? "" : "no nodes above the noise floor");
    out.estimates.set("blowup_paths", report.blowup_paths);
    out.estimates.set("nodes_checked", checked);
    out.estimates.set("worst_margin", checked > 0 ? worst : 0.0);
    out.estimates.set("check_floor", floor);
    out.estimates.set("bias_budget", bias);
    out.table = CsvTable({"metric", "value"});
    out.table.new_row().add("blowup_paths").add(report.blowup_paths);
    out.table.new_row().add("nodes_checked").add(checked);
    out.table.new_row().add("worst_margin").add(checked > 0 ? worst : 0.0);
    out.table.new_row().add("verdict").add(pass_str(out.all_pass));
    out.headline_name = "blowup_paths";
    out.headline = static_cast<double>(report.blowup_paths);
    return out;
}

// ---------------------------------------------------------------------------
// Multiplicative-noise experiments.
// ---------------------------------------------------------------------------

inline ExperimentOutput run_exp_event_small(RunConfig& cfg, unsigned workers,
                                            std::uint64_t seed) {
    EstimatorSpec spec;
    spec.estimand = Estimand::exp_event;
    spec.p = cfg.get_double("model.p", 2.0);
    const double d = cfg.get_double("model.d", 1.0);
    spec.sigma = cfg.get_double("model.sigma", 1.0);
    spec.epsilon = cfg.get_double("model.epsilon", 0.01);
    spec.t_eval = cfg.get_double("eval.t", 1.0);
    spec.n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 100000));

    const double analytic = blowup_lb_small_p(spec.p, d, spec.sigma, spec.epsilon, spec.t_eval);
    const EstimatorOutput mc = run_estimator(spec, seed, workers);
    const Verdict verdict = two_sided_bound_check(analytic, mc.primary);

    ExperimentOutput out;
    out.analytic.set("blowup_lb_small_p", analytic);
    out.analytic.set("regime", regime_name(classify_regime(spec.p, d).regime));
    out.estimates.set("mc_event_frequency", json_of(mc.primary));
    add_check(out, "analytic_vs_mc", verdict);
    out.table =
        CsvTable({"p", "d", "sigma", "epsilon", "t", "analytic_p", "mc_p", "stderr", "verdict"});
    out.table.new_row()
        .add(spec.p)
        .add(d)
        .add(spec.sigma)
        .add(spec.epsilon)
        .add(spec.t_eval)
        .add(analytic)
        .add(mc.primary.mean)
        .add(mc.primary.stderr_)
        .add(pass_str(verdict.pass));
    out.headline_name = "mc_event_frequency";
    out.headline = mc.primary.mean;
    return out;
}

inline ExperimentOutput run_exp_event_large(RunConfig& cfg, unsigned workers,
                                            std::uint64_t seed) {
    EstimatorSpec spec;
    spec.estimand = Estimand::exp_event;
    spec.p = cfg.get_double("model.p", 2.5);
    const double d = cfg.get_double("model.d", 1.0);
    spec.sigma = cfg.get_double("model.sigma", 0.1);
    spec.epsilon = cfg.get_double("model.epsilon", 0.01);
    const double C2 = cfg.get_double("model.C2", 1.0);
    const double C3 = cfg.get_double("model.C3", 1.0);
    const bool proof_form = cfg.get_bool("model.proof_form", true);
    spec.n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 100000));

    const LargePBound bound =
        blowup_lb_large_p(spec.p, d, spec.sigma, spec.epsilon, C2, C3, proof_form);
    spec.t_eval = bound.tstar;

    const TstarInputs tin{spec.p, d, C2, C3, spec.epsilon};
    const auto at_tstar = tstar_condition_sides(tin, bound.tstar);
    const auto below = tstar_condition_sides(tin, bound.tstar / (1.0 + 2.0 * kTstarSlack));

    const EstimatorOutput mc = run_estimator(spec, seed, workers);
    const Verdict verdict = two_sided_bound_check(bound.probability, mc.primary);

    ExperimentOutput out;
    out.analytic.set("tstar", bound.tstar);
    out.analytic.set("blowup_lb_large_p", bound.probability);
    out.analytic.set("proof_form", proof_form);
    out.estimates.set("mc_event_frequency", json_of(mc.primary));
    add_check(out, "analytic_vs_mc", verdict);
    add_check(out, "threshold_holds_at_tstar", at_tstar.holds(), at_tstar.rhs - at_tstar.lhs);
    add_check(out, "threshold_fails_below_tstar", !below.holds(), below.lhs - below.rhs);
    out.table = CsvTable({"p", "d", "sigma", "epsilon", "tstar", "analytic_p", "mc_p", "stderr",
                          "verdict"});
    out.table.new_row()
        .add(spec.p)
        .add(d)
        .add(spec.sigma)
        .add(spec.epsilon)
        .add(bound.tstar)
        .add(bound.probability)
        .add(mc.primary.mean)
        .add(mc.primary.stderr_)
        .add(pass_str(verdict.pass));
    out.headline_name = "tstar";
    out.headline = bound.tstar;
    return out;
}

inline ExperimentOutput run_tstar(RunConfig& cfg, unsigned, std::uint64_t) {
    TstarInputs in{};
    in.p = cfg.get_double("model.p", 2.5);
    in.d = cfg.get_double("model.d", 1.0);
    in.C2 = cfg.get_double("model.C2", 1.0);
    in.C3 = cfg.get_double("model.C3", 1.0);
    in.epsilon = cfg.get_double("model.epsilon", 0.01);

    const double tstar = tstar_from_2_10(in);
    const auto at_tstar = tstar_condition_sides(in, tstar);
    const auto below = tstar_condition_sides(in, tstar / (1.0 + 2.0 * kTstarSlack));

    ExperimentOutput out;
    out.analytic.set("tstar", tstar);
    out.analytic.set("lhs_at_tstar", at_tstar.lhs);
    out.analytic.set("rhs_at_tstar", at_tstar.rhs);
    add_check(out, "threshold_holds_at_tstar", at_tstar.holds(), at_tstar.rhs - at_tstar.lhs);
    add_check(out, "threshold_fails_below_tstar", !below.holds(), below.lhs - below.rhs);
    out.table = CsvTable({"p", "d", "C2", "C3", "epsilon", "tstar", "lhs", "rhs"});
    out.table.new_row()
        .add(in.p)
        .add(in.d)
        .add(in.C2)
        .add(in.C3)
        .add(in.epsilon)
        .add(tstar)
        .add(at_tstar.lhs)
        .add(at_tstar.rhs);
    out.headline_name = "tstar";
    out.headline = tstar;
    return out;
}

inline ExperimentOutput run_multiplicative_positivity(RunConfig& cfg, unsigned workers,
                                                      std::uint64_t seed) {
    const InitialDatum u0 = u0_from_config(cfg);
    const double p = cfg.get_double("model.p", 2.0);
    const double sigma = cfg.get_double("model.sigma", 0.5);
    const double horizon = cfg.get_double("model.horizon", 0.2);
    const std::size_t n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 100));

    PdeModel model;
    model.dimension = 1;
    model.extent = cfg.get_double("model.extent", default_truncation_radius(u0, horizon));
    model.drift = Drift::power(1.0, p);
    model.noise_kind = PdeModel::NoiseKind::multiplicative;
    model.noise_amp = sigma;

    SolverSpec solver;
    solver.horizon = horizon;
    solver.dt = cfg.get_double("solver.dt", 1e-3);
    solver.n_nodes = static_cast<std::size_t>(cfg.get_double("solver.n_nodes", 201));
    solver.scheme = scheme_from_config(cfg);

    const std::size_t n_steps = static_cast<std::size_t>(std::llround(horizon / solver.dt));
    std::vector<double> minima(n_paths);
    std::vector<char> blew(n_paths, 0);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        const BrownianPath path = sample_path(horizon, std::max<std::size_t>(1, n_steps),
                                              {seed, i});
        const SolveOutcome w = solve_random_multiplicative(model, u0, path, solver);
        minima[i] = w.min_nodal;
        blew[i] = w.blew_up() ? 1 : 0;
    });

    double worst = minima.empty() ? 0.0 : minima.front();
    std::size_t blowups = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        worst = std::min(worst, minima[i]);
        blowups += blew[i];
    }

    ExperimentOutput out;
    add_check(out, "min_nodal_above_neg_1e-8", worst >= -1e-8, worst + 1e-8);
    out.estimates.set("worst_min_nodal", worst);
    out.estimates.set("blowup_paths", blowups);
    out.table = CsvTable({"metric", "value"});
    out.table.new_row().add("worst_min_nodal").add(worst);
    out.table.new_row().add("blowup_paths").add(blowups);
    out.table.new_row().add("verdict").add(pass_str(out.all_pass));
    out.headline_name = "worst_min_nodal";
    out.headline = worst;
    return out;
}

inline ExperimentOutput run_supersolution(RunConfig& cfg, unsigned workers, std::uint64_t seed) {
    InitialDatum u0 = cfg.has("u0.kind") || cfg.has("u0.c") || cfg.has("u0.k")
                          ? u0_from_config(cfg)
                          : InitialDatum::gaussian_bump(5.0, 1.0);
    const double p = cfg.get_double("model.p", 2.0);
    const double sigma = cfg.get_double("model.sigma", 0.5);
    const double t_check = cfg.get_double("eval.t", 0.05);
    const std::size_t n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 10000));

    PdeModel model;
    model.dimension = 1;
    model.extent = cfg.get_double("model.extent", default_truncation_radius(u0, t_check));
    model.drift = Drift::power(1.0, p);
    model.noise_kind = PdeModel::NoiseKind::multiplicative;
    model.noise_amp = sigma;

    SolverSpec solver;
    solver.horizon = t_check;
    solver.dt = cfg.get_double("solver.dt", 1e-4);
    solver.n_nodes = static_cast<std::size_t>(cfg.get_double("solver.n_nodes", 257));
    solver.scheme = scheme_from_config(cfg);
    const double bias = cfg.get_double("mc.bias_budget", 10.0 * solver.dt * (1.0 + u0.sup_norm()));

    const FieldComparisonReport report =
        supersolution_check(model, u0, solver, n_paths, t_check, seed, workers, bias);

    ExperimentOutput out;
    add_check(out, "mc_mean_dominates_deterministic", report.ok, report.worst_margin,
              report.note);
    out.estimates.set("worst_margin", report.worst_margin);
    out.estimates.set("nodes_checked", report.nodes_checked);
    out.estimates.set("paths_used", report.n_paths);
    out.estimates.set("blowup_paths", report.blowup_paths);
    out.estimates.set("bias_budget", bias);
    if (!report.reference.empty()) {
        out.plot = CsvTable({"x", "mc_mean_u", "stderr", "v_det"});
        const Grid grid = model.make_grid(solver.n_nodes);
        for (std::size_t j = 0; j < report.reference.size(); ++j) {
            out.plot->new_row()
                .add(grid.node(j))
                .add(report.mean[j])
                .add(report.stderr_[j])
                .add(report.reference[j]);
        }
    }
    out.table = CsvTable({"metric", "value"});
    out.table.new_row().add("worst_margin").add(report.worst_margin);
    out.table.new_row().add("nodes_checked").add(report.nodes_checked);
    out.table.new_row().add("blowup_paths").add(report.blowup_paths);
    out.table.new_row().add("verdict").add(pass_str(report.ok));
    out.headline_name = "worst_margin";
    out.headline = report.worst_margin;
    return out;
}

inline ExperimentOutput run_fujita(RunConfig& cfg, unsigned, std::uint64_t, bool expect_blowup) {
    InitialDatum u0 = cfg.has("u0.kind") || cfg.has("u0.c") || cfg.has("u0.k")
                          ? u0_from_config(cfg)
                          : (expect_blowup ? InitialDatum::gaussian_bump(50.0, 1.0)
                                           : InitialDatum::gaussian_bump(0.01, 1.0));
    const double p = cfg.get_double("model.p", expect_blowup ? 2.0 : 4.0);
    const double horizon = cfg.get_double("model.horizon", expect_blowup ? 1.0 : 5.0);

    PdeModel model;
    model.dimension = static_cast<int>(cfg.get_double("model.dimension", 1));
    model.extent = cfg.get_double("model.extent", default_truncation_radius(u0, horizon));
    model.drift = Drift::power(1.0, p);

    SolverSpec solver;
    solver.horizon = horizon;
    solver.dt = cfg.get_double("solver.dt", 1e-3);
    solver.n_nodes = static_cast<std::size_t>(cfg.get_double("solver.n_nodes", 257));
    solver.scheme = scheme_from_config(cfg);
    solver.record_trace = true;

    const SolveOutcome outcome = solve_deterministic(model, u0, solver);

    ExperimentOutput out;
    double trace_max = 0.0;
    out.trace = CsvTable({"t", "sup_norm"});
    for (const auto& [tt, sup] : outcome.supnorm_trace) {
        out.trace->new_row().add(tt).add(sup);
        trace_max = std::max(trace_max, sup);
    }
    out.estimates.set("blew_up", outcome.blew_up());
    out.estimates.set("final_time", outcome.final_time);
    out.estimates.set("sup_trace_max", trace_max);
    if (expect_blowup) {
        out.estimates.set("t_b", outcome.t_b);
        add_check(out, "blowup_before_horizon", outcome.blew_up() && outcome.t_b < horizon,
                  horizon - outcome.t_b);
        out.headline_name = "t_b";
        out.headline = outcome.t_b;
    } else {
        const double bound = 2.0 * (1.0 + u0.sup_norm());
        add_check(out, "completed_with_bounded_sup",
                  !outcome.blew_up() && trace_max <= bound, bound - trace_max);
        out.headline_name = "sup_trace_max";
        out.headline = trace_max;
    }
    out.table = CsvTable({"metric", "value"});
    out.table.new_row().add("status").add(outcome.blew_up() ? "blewup" : "completed");
    out.table.new_row().add("t_b_or_final").add(outcome.blew_up() ? outcome.t_b
                                                                  : outcome.final_time);
    out.table.new_row().add("sup_trace_max").add(trace_max);
    return out;
}

inline ExperimentOutput run_grid_convergence(RunConfig& cfg, unsigned, std::uint64_t) {
    const InitialDatum u0 = u0_from_config(cfg);
    if (u0.kind != InitialDatum::Kind::gaussian_bump)
        throw ConfigurationError("grid_convergence: u0.kind must be gaussian_bump");
    const double k = cfg.get_double("model.k", 1.0);
    const double horizon = cfg.get_double("model.horizon", 0.25);
    const double extent =
        cfg.get_double("model.extent", default_truncation_radius(u0, horizon));
    const std::size_t n_coarse = static_cast<std::size_t>(cfg.get_double("solver.n_nodes", 121));
    const double dt_coarse = cfg.get_double("solver.dt", 2e-5);

    PdeModel model;
    model.dimension = 1;
    model.extent = extent;
    model.drift = Drift::linear(k);

    auto max_error = [&](std::size_t n_nodes, double dt) {
        SolverSpec solver;
        solver.horizon = horizon;
        solver.dt = dt;
        solver.n_nodes = n_nodes;
        const SolveOutcome outcome = solve_deterministic(model, u0, solver);
        const Grid grid = outcome.field.grid;
        // closed form: e^{kT} times the Gaussian-Gaussian convolution
        const double spread = 1.0 + 4.0 * u0.k * horizon;
        double err = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double x = grid.node(i);
            const double exact =
                std::exp(k * horizon) * u0.c / std::sqrt(spread) * std::exp(-u0.k * x * x / spread);
            err = std::max(err, std::fabs(outcome.field.values[i] - exact));
        }
        return err;
    };

    const double err_coarse = max_error(n_coarse, dt_coarse);
    const double err_fine = max_error(2 * (n_coarse - 1) + 1, 0.5 * dt_coarse);
    const double factor = err_fine > 0.0 ? err_coarse / err_fine : HUGE_VAL;

    ExperimentOutput out;
    out.estimates.set("error_coarse", err_coarse);
    out.estimates.set("error_fine", err_fine);
    out.estimates.set("reduction_factor", factor);
    add_check(out, "halving_reduces_error_3x", factor >= 3.0, factor - 3.0);
    out.table = CsvTable({"level", "n_nodes", "dt", "max_error"});
    out.table.new_row().add("coarse").add(n_coarse).add(dt_coarse).add(err_coarse);
    out.table.new_row()
        .add("fine")
        .add(2 * (n_coarse - 1) + 1)
        .add(0.5 * dt_coarse)
        .add(err_fine);
    out.headline_name = "reduction_factor";
    out.headline = factor;
    return out;
}

// ---------------------------------------------------------------------------
// Bounded-domain blowup-time experiments.
// ---------------------------------------------------------------------------

inline ExperimentOutput run_eigenpair(RunConfig& cfg, unsigned, std::uint64_t) {
    const double L = cfg.get_double("domain.L", kPi);
    const Eigenpair pair = first_eigenpair(L);
    const double mass =
        adaptive_simpson([&](double x) { return pair.phi(x); }, 0.0, L, 1e-12);

    ExperimentOutput out;
    out.analytic.set("lambda1", pair.lambda1);
    out.analytic.set("phi_l1_mass", mass);
    add_check(out, "phi_has_unit_mass", std::fabs(mass - 1.0) <= 1e-10,
              1e-10 - std::fabs(mass - 1.0));
    out.table = CsvTable({"L", "lambda1", "phi_l1_mass"});
    out.table.new_row().add(L).add(pair.lambda1).add(mass);
    out.headline_name = "lambda1";
    out.headline = pair.lambda1;
    return out;
}

inline ExperimentOutput run_deterministic_tstar(RunConfig& cfg, unsigned, std::uint64_t) {
    BoundedDomainParams params{};
    params.lambda1 = lambda1_from_config(cfg);
    params.beta = cfg.get_double("model.beta", 1.0);
    params.kappa = cfg.get_double("model.kappa", 0.5);
    params.u_phi_0 = cfg.get_double("model.u_phi_0", 0.5);
    params.C = cfg.get_double("model.C", 1.0);
    const double threshold = cfg.get_double("tau.threshold", params.u_phi_0 / params.beta);

    const auto tstar = deterministic_Tstar(params, threshold);

    ExperimentOutput out;
    out.table = CsvTable({"lambda1", "beta", "threshold", "tstar"});
    if (tstar) {
        const double qcheck = adaptive_simpson(
            [&](double s) { return std::exp(-params.lambda1 * params.beta * s); }, 0.0, *tstar,
            1e-12);
        out.analytic.set("tstar", *tstar);
        add_check(out, "integral_matches_threshold", std::fabs(qcheck - threshold) <= 1e-8,
                  1e-8 - std::fabs(qcheck - threshold));
        out.table.new_row().add(params.lambda1).add(params.beta).add(threshold).add(*tstar);
        out.headline = *tstar;
    } else {
        out.analytic.set("tstar", "global");
        add_check(out, "threshold_unreachable", threshold >= 1.0 / (params.lambda1 * params.beta));
        out.table.new_row().add(params.lambda1).add(params.beta).add(threshold).add("global");
        out.headline = HUGE_VAL;
    }
    out.headline_name = "tstar";
    return out;
}

inline ExperimentOutput run_h_density(RunConfig& cfg, unsigned, std::uint64_t) {
    BoundedDomainParams params{};
    params.lambda1 = lambda1_from_config(cfg);
    params.beta = cfg.get_double("model.beta", 1.0);
    params.kappa = cfg.get_double("model.kappa", 0.5);
    params.C = cfg.get_double("model.C", 1.0);
    params.u_phi_0 = 1.0;
    std::vector<double> pairings = {0.25, 0.5, 1.0, 2.0};
    if (cfg.has("model.u_phi_0s")) pairings = cfg.get_double_list("model.u_phi_0s");

    // Truncation radius for the normalization quadrature from the known
    // y^{-alpha-1} tail.
    const double a = params.alpha();
    const double scale = 2.0 / (params.kappa * params.kappa * params.beta * params.beta);
    double y_max = scale;
    while (dlm_density_h(y_max, params) * y_max / a > 1e-12 && y_max < 1e12) y_max *= 2.0;
    const double mass = adaptive_simpson(
        [&](double y) { return y > 0.0 ? dlm_density_h(y, params) : 0.0; }, 1e-300, y_max, 1e-10);

    ExperimentOutput out;
    out.analytic.set("alpha", a);
    out.analytic.set("normalization", mass);
    add_check(out, "density_normalizes", std::fabs(mass - 1.0) <= 1e-6,
              1e-6 - std::fabs(mass - 1.0));

    out.table = CsvTable({"u_phi_0", "blowup_lower_bound"});
    out.plot = CsvTable({"u_phi_0", "blowup_lower_bound"});
    JsonValue bounds = JsonValue::object();
    bool monotone = true;
    double prev = -1.0;
    for (double u_phi : pairings) {
        BoundedDomainParams p = params;
        p.u_phi_0 = u_phi;
        const double bound = dlm_blowup_lower_bound(p);
        monotone = monotone && bound >= prev;
        prev = bound;
        out.table.new_row().add(u_phi).add(bound);
        out.plot->new_row().add(u_phi).add(bound);
        bounds.set("u_phi_0_" + format_number(u_phi), bound);
    }
    out.analytic.set("bounds", std::move(bounds));
    add_check(out, "bound_monotone_in_pairing", monotone);
    out.headline_name = "blowup_lower_bound";
    out.headline = prev;
    return out;
}

inline ExperimentOutput run_tau_survival(RunConfig& cfg, unsigned workers, std::uint64_t seed) {
    BoundedDomainParams params{};
    params.lambda1 = lambda1_from_config(cfg);
    params.beta = cfg.get_double("model.beta", 1.0);
    params.kappa = cfg.get_double("model.kappa", 0.5);
    params.u_phi_0 = cfg.get_double("model.u_phi_0", 0.5);
    params.C = cfg.get_double("model.C", 1.0);
    const std::string choice_name = cfg.get_string("tau.threshold_choice", "pairing");
    ThresholdChoice choice;
    if (choice_name == "pairing") {
        choice = ThresholdChoice::pairing;
    } else if (choice_name == "pairing_pow_neg_beta") {
        choice = ThresholdChoice::pairing_pow_neg_beta;
    } else {
        throw ConfigurationError(
            "key 'tau.threshold_choice': expected pairing or pairing_pow_neg_beta, got '" +
            choice_name + "'");
    }
    const std::size_t n_paths = static_cast<std::size_t>(cfg.get_double("mc.n_paths", 10000));
    double dt = cfg.get_double("tau.dt", 0.0);
    if (dt <= 0.0) {
        const auto tstar = deterministic_Tstar(params, tau_threshold(params, choice));
        dt = tstar ? 1e-3 * *tstar : 1e-3;
    }

    const TauSurvivalResult result =
        estimate_p_tau_gt_Tstar(params, choice, n_paths, dt, seed, workers);

    ExperimentOutput out;
    out.table = CsvTable({"metric", "value"});
    if (!result.defined) {
        out.analytic.set("tstar", "global");
        add_check(out, "experiment_defined", true, 0.0,
                  "deterministic blowup time is infinite; survival experiment not defined");
        out.table.new_row().add("tstar").add("global");
        out.headline_name = "tstar";
        out.headline = HUGE_VAL;
        return out;
    }
    out.analytic.set("tstar", result.tstar);
    out.analytic.set("functional_cap", result.functional_cap);
    out.analytic.set("h_density_blowup_bound", dlm_blowup_lower_bound(params));
    out.estimates.set("p_tau_gt_tstar", json_of(result.estimate));
    out.estimates.set("route_mismatches", result.route_mismatches);
    add_check(out, "tau_and_functional_routes_agree", result.route_mismatches == 0,
              -static_cast<double>(result.route_mismatches));
    add_check(out, "estimate_is_probability",
              result.estimate.mean >= 0.0 && result.estimate.mean <= 1.0);
    out.table.new_row().add("tstar").add(result.tstar);
    out.table.new_row().add("functional_cap").add(result.functional_cap);
    out.table.new_row().add("p_tau_gt_tstar").add(result.estimate.mean);
    out.table.new_row().add("stderr").add(result.estimate.stderr_);
    out.table.new_row().add("route_mismatches").add(result.route_mismatches);
    out.headline_name = "p_tau_gt_tstar";
    out.headline = result.estimate.mean;
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Registry and runner.
// ---------------------------------------------------------------------------

using ExperimentFn = ExperimentOutput (*)(RunConfig&, unsigned, std::uint64_t);

struct ExperimentEntry {
    const char* name;
    unsigned families;
    ExperimentFn fn;
};

inline const std::vector<ExperimentEntry>& experiment_registry() {
    static const std::vector<ExperimentEntry> entries = {
        {"positivity", kFamilyAdditive, detail::run_positivity},
        {"interval", kFamilyAdditive, detail::run_interval},
        {"rate", kFamilyAnalytic | kFamilyAdditive, detail::run_rate},
        {"mean_field", kFamilyAdditive, detail::run_mean_field},
        {"comparison", kFamilyAdditive, detail::run_comparison},
        {"jensen", kFamilyAnalytic | kFamilyAdditive, detail::run_jensen},
        {"sublinear", kFamilyAdditive, detail::run_sublinear},
        {"exp_event_small", kFamilyMultiplicative, detail::run_exp_event_small},
        {"exp_event_large", kFamilyMultiplicative, detail::run_exp_event_large},
        {"tstar", kFamilyAnalytic | kFamilyMultiplicative, detail::run_tstar},
        {"multiplicative_positivity", kFamilyMultiplicative,
         detail::run_multiplicative_positivity},
        {"supersolution", kFamilyMultiplicative, detail::run_supersolution},
        {"fujita_blowup", kFamilyMultiplicative,
         [](RunConfig& c, unsigned w, std::uint64_t s) { return detail::run_fujita(c, w, s, true); }},
        {"fujita_global", kFamilyMultiplicative,
         [](RunConfig& c, unsigned w, std::uint64_t s) { return detail::run_fujita(c, w, s, false); }},
        {"grid_convergence", kFamilyMultiplicative, detail::run_grid_convergence},
        {"eigenpair", kFamilyAnalytic | kFamilyBlowupTime, detail::run_eigenpair},
        {"deterministic_tstar", kFamilyAnalytic | kFamilyBlowupTime,
         detail::run_deterministic_tstar},
        {"h_density", kFamilyAnalytic | kFamilyBlowupTime, detail::run_h_density},
        {"tau_survival", kFamilyBlowupTime, detail::run_tau_survival},
    };
    return entries;
}

inline const ExperimentEntry& find_experiment(const std::string& name) {
    for (const auto& e : experiment_registry()) {
        if (name == e.name) return e;
    }
    throw ConfigurationError("unknown experiment '" + name + "'");
}

struct ExperimentResult {
    std::string name;
    bool all_pass = true;
    double headline = 0.0;
    std::string headline_name;
    std::string summary_json;
    std::vector<std::string> files_written;
};

// Runs the named experiment from the config and writes its table, summary,
// and optional plot/trace files into out_dir. Every file embeds the config
// hash and master seed; identical (config, seed) reruns are byte-identical.
inline ExperimentResult run_experiment(RunConfig& cfg, const std::filesystem::path& out_dir,
                                       unsigned workers) {
    const std::string name = cfg.get_string("experiment");
    const ExperimentEntry& entry = find_experiment(name);
    const std::uint64_t seed = cfg.get_u64("seed", 1);

    const auto start = std::chrono::steady_clock::now();
    ExperimentOutput out = entry.fn(cfg, workers, seed);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    cfg.reject_unknown_keys();

    const std::string hash = cfg.config_hash();
    const std::string stamp = std::string("# ") + kToolVersion + " config_hash=" + hash +
                              " seed=" + std::to_string(seed);

    ExperimentResult result;
    result.name = name;
    result.all_pass = out.all_pass;
    result.headline = out.headline;
    result.headline_name = out.headline_name;

    std::filesystem::create_directories(out_dir);
    JsonValue inputs = JsonValue::object();
    for (const auto& kv : cfg.effective()) inputs.set(kv.first, kv.second);

    JsonValue summary = JsonValue::object();
    summary.set("experiment", name);
    summary.set("version", kToolVersion);
    summary.set("config_hash", hash);
    summary.set("seed", seed);
    summary.set("inputs", std::move(inputs));
    summary.set("analytic", std::move(out.analytic));
    summary.set("estimates", std::move(out.estimates));
    summary.set("checks", std::move(out.checks));
    summary.set("all_pass", out.all_pass);
    summary.set("wall_clock_seconds", wall);
    result.summary_json = summary.dump();

    auto write_csv = [&](const CsvTable& table, const std::string& suffix) {
        const auto path = out_dir / (name + suffix);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigurationError("cannot write output file: " + path.string());
        f << stamp << '\n';  // provenance comment, then the header row
        table.write_to_stream(f);
        result.files_written.push_back(path.string());
    };

    write_csv(out.table, "_table.csv");
    const auto summary_path = out_dir / (name + "_summary.json");
    write_text_file(summary_path, result.summary_json);
    result.files_written.push_back(summary_path.string());
    if (out.plot) write_csv(*out.plot, "_plot.csv");
    if (out.trace) write_csv(*out.trace, "_trace.csv");
    return result;
}

} // namespace blowlab
