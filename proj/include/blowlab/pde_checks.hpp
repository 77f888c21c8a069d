#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "blowlab/parallel.hpp"
#include "blowlab/pde_solver.hpp"
#include "blowlab/rng.hpp"

namespace blowlab {

// Node-by-node comparison of a Monte Carlo mean field against a
// deterministic reference, with the 3-sigma band plus a declared bias
// budget.
struct FieldComparisonReport {
    bool ok = false;
    double worst_margin = 0.0;   // min over nodes of the slack; >= 0 iff ok
    std::size_t worst_node = 0;
    std::size_t nodes_checked = 0;
    std::size_t n_paths = 0;
    std::size_t blowup_paths = 0;
    double t_check = 0.0;
    std::vector<double> mean;    // MC mean per node
    std::vector<double> stderr_; // per-node standard error
    std::vector<double> reference;
    std::string note;
};

namespace detail {

struct FieldMoments {
    std::vector<double> mean;
    std::vector<double> stderr_;
};

// Index-ordered pairwise reduction of per-path fields into nodewise mean
// and standard error; identical for any worker count by construction.
inline FieldMoments reduce_fields(const std::vector<std::vector<double>>& samples) {
    const std::size_t n = samples.size();
    const std::size_t nodes = samples.empty() ? 0 : samples.front().size();
    FieldMoments m;
    m.mean.assign(nodes, 0.0);
    m.stderr_.assign(nodes, 0.0);
    if (n == 0) return m;
    std::vector<double> column(n);
    for (std::size_t j = 0; j < nodes; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = samples[i][j];
        const double mean = pairwise_sum(column) / static_cast<double>(n);
        m.mean[j] = mean;
        if (n > 1) {
            for (std::size_t i = 0; i < n; ++i) {
                const double d = samples[i][j] - mean;
                column[i] = d * d;
            }
            const double var = pairwise_sum(column) / static_cast<double>(n - 1);
            m.stderr_[j] = std::sqrt(var / static_cast<double>(n));
        }
    }
    return m;
}

} // namespace detail

// Supersolution check: the Monte Carlo mean of the multiplicative-noise
// solution u must dominate the deterministic solution of v_t = Lap v + v^p
// at every node, up to 3 SE plus the bias budget. Paths that blow up before
// t_check are excluded from the mean (they can only push it up, so the
// check stays conservative) and counted in the report.
inline FieldComparisonReport supersolution_check(const PdeModel& model, const InitialDatum& u0,
                                                 const SolverSpec& spec, std::size_t n_paths,
                                                 double t_check, std::uint64_t master_seed,
                                                 unsigned workers, double bias_budget) {
    if (model.noise_kind != PdeModel::NoiseKind::multiplicative)
        throw ConfigurationError("supersolution_check: model noise must be multiplicative");
    if (model.drift.kind != Drift::Kind::power || !(model.drift.p > 1.0))
        throw ConfigurationError("supersolution_check: drift must be power with p > 1");
    if (!(t_check > 0.0 && t_check <= spec.horizon))
        throw ConfigurationError("supersolution_check: t_check must lie in (0, horizon]");

    FieldComparisonReport report;
    report.t_check = t_check;

    // Deterministic reference on the same grid and stepping.
    PdeModel det = model;
    det.noise_kind = PdeModel::NoiseKind::none;
    det.noise_amp = 0.0;
    SolverSpec det_spec = spec;
    det_spec.horizon = t_check;
    SolveOutcome v = solve_deterministic(det, u0, det_spec);
    if (v.blew_up()) {
        // Comparison restricted to times where the reference is finite.
        report.t_check = 0.5 * v.t_b;
        det_spec.horizon = report.t_check;
        v = solve_deterministic(det, u0, det_spec);
        report.note = "deterministic reference blew up; comparison time halved to " +
                      std::to_string(report.t_check);
    }

    SolverSpec path_spec = spec;
    path_spec.horizon = report.t_check;
    const std::size_t path_steps =
        static_cast<std::size_t>(std::llround(report.t_check / spec.dt));

    std::vector<std::vector<double>> fields(n_paths);
    std::vector<char> blew(n_paths, 0);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        const SeedSpec seed{master_seed, i};
        const BrownianPath path =
            sample_path(report.t_check, std::max<std::size_t>(1, path_steps), seed);
        const SolveOutcome w = solve_random_multiplicative(model, u0, path, path_spec);
        if (w.blew_up()) {
            blew[i] = 1;
            return;
        }
        fields[i] = reconstruct_u(w.field, path, model.noise_amp, report.t_check).values;
    });

    std::vector<std::vector<double>> kept;
    kept.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (blew[i]) {
            ++report.blowup_paths;
        } else {
            kept.push_back(std::move(fields[i]));
        }
    }
    report.n_paths = kept.size();
    if (kept.empty()) {
        report.note = "all paths blew up before the comparison time";
        return report;
    }

    auto moments = detail::reduce_fields(kept);
    report.mean = std::move(moments.mean);
    report.stderr_ = std::move(moments.stderr_);
    report.reference = v.field.values;
    report.nodes_checked = report.reference.size();
    report.ok = true;
    report.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < report.reference.size(); ++j) {
        const double slack =
            report.mean[j] + 3.0 * report.stderr_[j] + bias_budget - report.reference[j];
        if (slack < report.worst_margin) {
            report.worst_margin = slack;
            report.worst_node = j;
        }
        if (slack < 0.0) report.ok = false;
    }
    return report;
}

// Sublinear global-existence check for du = (Lap u + k u^p) dt + sigma dB,
// 0 < p <= 1: (i) no sampled path blows up before the horizon, and (ii) the
// Monte Carlo mean of |u| stays below the deterministic solution of
// v_t = Lap v + |k| v^p within 3 SE plus the bias budget.
inline FieldComparisonReport sublinear_global_check(double k, double p, double sigma,
                                                    const InitialDatum& u0, const PdeModel& base,
                                                    const SolverSpec& spec, std::size_t n_paths,
                                                    std::uint64_t master_seed, unsigned workers,
                                                    double bias_budget) {
    if (!(p > 0.0 && p <= 1.0))
        throw ConfigurationError("sublinear_global_check: requires 0 < p <= 1");

    PdeModel model = base;
    model.drift = Drift::power(k, p);
    model.noise_kind = PdeModel::NoiseKind::additive;
    model.noise_amp = sigma;

    FieldComparisonReport report;
    report.t_check = spec.horizon;

    const std::size_t path_steps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.horizon / spec.dt)));
    std::vector<std::vector<double>> fields(n_paths);
    std::vector<char> blew(n_paths, 0);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        const SeedSpec seed{master_seed, i};
        const BrownianPath path = sample_path(spec.horizon, path_steps, seed);
        const SolveOutcome outcome = solve_random_additive(model, u0, path, spec);
        if (outcome.blew_up()) {
            blew[i] = 1;
            return;
        }
        std::vector<double> abs_u = outcome.field.values;
        for (double& v : abs_u) v = std::fabs(v);
        fields[i] = std::move(abs_u);
    });

    for (std::size_t i = 0; i < n_paths; ++i)
        if (blew[i]) ++report.blowup_paths;
    report.n_paths = n_paths - report.blowup_paths;
    if (report.blowup_paths > 0) {
        report.ok = false;
        report.note = "sampled paths blew up; sublinear equation should be global";
        return report;
    }

    PdeModel det = base;
    det.drift = Drift::power(std::fabs(k), p);
    det.noise_kind = PdeModel::NoiseKind::none;
    det.noise_amp = 0.0;
    const SolveOutcome v = solve_deterministic(det, u0, spec);
    if (v.blew_up()) {
        report.ok = false;
        report.note = "deterministic majorant blew up unexpectedly";
        return report;
    }

    auto moments = detail::reduce_fields(fields);
    report.mean = std::move(moments.mean);
    report.stderr_ = std::move(moments.stderr_);
    report.reference = v.field.values;
    report.nodes_checked = report.reference.size();
    report.ok = true;
    report.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < report.reference.size(); ++j) {
        const double slack =
            report.reference[j] + 3.0 * report.stderr_[j] + bias_budget - report.mean[j];
        if (slack < report.worst_margin) {
            report.worst_margin = slack;
            report.worst_node = j;
        }
        if (slack < 0.0) report.ok = false;
    }
    return report;
}

} // namespace blowlab
