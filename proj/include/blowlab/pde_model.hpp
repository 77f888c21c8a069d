#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blowlab/errors.hpp"
#include "blowlab/field.hpp"
#include "blowlab/initial_datum.hpp"

namespace blowlab {

// Reaction term of the parabolic equation.
//   linear:    f(u) = k u
//   power:     f(u) = k u^p (odd extension sign(u)|u|^p for non-integer p)
//   bounded_G: f(u) = C u^{1+beta} for u > 0, 0 otherwise
struct Drift {
    enum class Kind { linear, power, bounded_G };

    Kind kind = Kind::linear;
    double k = 0.0;
    double p = 1.0;
    double C = 1.0;
    double beta = 1.0;

    static Drift linear(double k) { return {Kind::linear, k, 1.0, 1.0, 1.0}; }

    static Drift power(double k, double p) {
        if (!(p > 0.0)) throw std::invalid_argument("Drift::power: p must be > 0");
        return {Kind::power, k, p, 1.0, 1.0};
    }

    static Drift bounded_G(double C, double beta) {
        if (!(C > 0.0 && beta > 0.0))
            throw std::invalid_argument("Drift::bounded_G: C and beta must be > 0");
        return {Kind::bounded_G, 0.0, 1.0, C, beta};
    }

    double operator()(double u) const {
        switch (kind) {
            case Kind::linear: return k * u;
            case Kind::power: return k * signed_pow(u, p);
            case Kind::bounded_G: return u > 0.0 ? C * std::pow(u, 1.0 + beta) : 0.0;
        }
        return 0.0;
    }

    static double signed_pow(double u, double p) {
        if (p == std::floor(p)) return std::pow(u, p);
        return u >= 0.0 ? std::pow(u, p) : -std::pow(-u, p);
    }
};

struct PdeModel {
    enum class DomainKind { whole_space_truncated, dirichlet_interval };
    enum class NoiseKind { none, additive, multiplicative };

    int dimension = 1;
    DomainKind domain_kind = DomainKind::whole_space_truncated;
    double extent = 6.0;  // R for [-R,R]^d, L for (0,L)
    Drift drift = Drift::linear(0.0);
    NoiseKind noise_kind = NoiseKind::none;
    double noise_amp = 0.0;  // sigma (whole space) or kappa (bounded domain)

    void validate() const {
        if (dimension != 1 && dimension != 2)
            throw ConfigurationError("PdeModel: dimension must be 1 or 2");
        if (!(extent > 0.0)) throw ConfigurationError("PdeModel: domain extent must be > 0");
        if (noise_kind != NoiseKind::none && !(noise_amp >= 0.0))
            throw ConfigurationError("PdeModel: noise amplitude must be >= 0");
        if (domain_kind == DomainKind::dirichlet_interval && dimension != 1)
            throw ConfigurationError("PdeModel: the Dirichlet interval domain is 1-d");
    }

    Grid make_grid(std::size_t n_nodes) const {
        validate();
        Grid g;
        g.n = n_nodes;
        g.d = dimension;
        if (domain_kind == DomainKind::whole_space_truncated) {
            g.xmin = -extent;
            g.xmax = extent;
        } else {
            g.xmin = 0.0;
            g.xmax = extent;
        }
        g.validate();
        return g;
    }
};

// Truncation radius for whole-space runs: initial support plus six
// diffusion standard deviations keeps the linear far field below 1e-8 of
// its peak over the horizon.
inline double default_truncation_radius(const InitialDatum& u0, double horizon) {
    return u0.support_radius(1e-8) + 6.0 * std::sqrt(2.0 * std::max(horizon, 1e-12));
}

struct SolverSpec {
    enum class Scheme { explicit_euler, semi_implicit };

    double dt = 1e-3;
    Scheme scheme = Scheme::semi_implicit;
    double horizon = 1.0;              // T_max
    std::size_t n_nodes = 201;         // grid nodes per axis
    double blowup_threshold = 0.0;     // 0: default 1e6 * (1 + sup|u0|)
    bool adaptive = true;              // halve dt on >20% sup-norm growth
    bool record_trace = false;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigurationError("SolverSpec: dt must be > 0");
        if (!(horizon > 0.0)) throw ConfigurationError("SolverSpec: horizon must be > 0");
        if (n_nodes < 3) throw ConfigurationError("SolverSpec: need at least 3 nodes");
    }

    double threshold_for(const InitialDatum& u0) const {
        return blowup_threshold > 0.0 ? blowup_threshold : 1e6 * (1.0 + u0.sup_norm());
    }
};

struct SolveOutcome {
    enum class Status { completed, blewup };

    Status status = Status::completed;
    double t_b = 0.0;        // first time the sup norm exceeded the threshold
    double final_time = 0.0;
    double min_nodal = 0.0;  // smallest nodal value seen over the whole run
    ScalarField field;       // state at final_time (or when blowup tripped)
    std::vector<std::pair<double, double>> supnorm_trace;  // (t, sup|u|)

    bool blew_up() const { return status == Status::blewup; }
};

} // namespace blowlab
