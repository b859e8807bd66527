#pragma once

// Problem definitions: coefficients, source, boundary data with analytic
// Caputo derivatives, initial data, optional exact solution. Includes the
// manufactured benchmark family and a small key=value run-configuration file.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "subdiff4/specfun.hpp"

namespace subdiff4 {

using TimeFn = std::function<double(double)>;
using SpaceFn = std::function<double(double)>;
using SpaceTimeFn = std::function<double(double, double)>;

/// Data for  d_t^alpha u + u_xxxx = q u + f  on (0,L) x (0,T] with u and u_x
/// prescribed at both endpoints.
///
/// The boundary Caputo derivatives cap_* are required analytically by the
/// scheme's boundary closure; see SolverOptions::l1_boundary_fallback for the
/// flagged numerical substitute.
struct ProblemSpec {
    double alpha = 0.5; ///< fractional order, (0,1)
    double q = 0.0;     ///< reaction coefficient
    double L = 1.0;
    double T = 1.0;

    SpaceTimeFn f;     ///< source
    TimeFn fx_left;    ///< f_x(0, t); supplied, never finite-differenced
    TimeFn fx_right;   ///< f_x(L, t)
    SpaceFn u0;        ///< initial data

    TimeFn b0l, b0r;   ///< u at x = 0, L
    TimeFn b1l, b1r;   ///< u_x at x = 0, L
    TimeFn cap_b0l, cap_b0r, cap_b1l, cap_b1r; ///< analytic d_t^alpha of the above

    std::optional<SpaceTimeFn> exact_u;
    std::optional<SpaceTimeFn> exact_v; ///< exact u_xx

    bool has_analytic_boundary_caputo() const {
        return cap_b0l && cap_b0r && cap_b1l && cap_b1r;
    }

    /// Checks parameter ranges, presence of required callables, and the
    /// corner compatibility u0(0) = b0l(0), u0(L) = b0r(0).
    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ProblemSpec: alpha must lie in (0,1)");
        if (!(L > 0.0) || !(T > 0.0)) throw std::invalid_argument("ProblemSpec: L and T must be positive");
        if (!f || !fx_left || !fx_right || !u0 || !b0l || !b0r || !b1l || !b1r) {
            throw std::invalid_argument("ProblemSpec: missing required callable");
        }
        const double tol = 1e-12;
        if (std::fabs(u0(0.0) - b0l(0.0)) > tol || std::fabs(u0(L) - b0r(0.0)) > tol) {
            throw std::invalid_argument("ProblemSpec: initial and boundary data incompatible at the corners");
        }
    }
};

/// The four derived boundary loads
///   hat_b0l(t) = q b0l(t) - cap_b0l(t) + f(0,t),   hat_b1l(t) = q b1l(t) - cap_b1l(t) + f_x(0,t),
/// and their right-endpoint counterparts with f, f_x at x = L.
struct HatBoundary {
    TimeFn b0l, b0r, b1l, b1r;
};

/// Builds the hat callables from analytic boundary Caputo derivatives.
/// Throws if any cap_* callable is absent (the L1-based substitute lives in
/// the solver, not here).
inline HatBoundary hat_boundary(const ProblemSpec& spec) {
    if (!spec.has_analytic_boundary_caputo()) {
        throw std::runtime_error("hat_boundary: analytic boundary Caputo derivatives missing");
    }
    HatBoundary hb;
    const double q = spec.q, L = spec.L;
    const SpaceTimeFn f = spec.f;
    const TimeFn fxl = spec.fx_left, fxr = spec.fx_right;
    const TimeFn b0l = spec.b0l, b0r = spec.b0r, b1l = spec.b1l, b1r = spec.b1r;
    const TimeFn c0l = spec.cap_b0l, c0r = spec.cap_b0r, c1l = spec.cap_b1l, c1r = spec.cap_b1r;
    hb.b0l = [=](double t) { return q * b0l(t) - c0l(t) + f(0.0, t); };
    hb.b0r = [=](double t) { return q * b0r(t) - c0r(t) + f(L, t); };
    hb.b1l = [=](double t) { return q * b1l(t) - c1l(t) + fxl(t); };
    hb.b1r = [=](double t) { return q * b1r(t) - c1r(t) + fxr(t); };
    return hb;
}

/// Benchmark problem with exact solution u = omega_{1+sigma}(t) sin(pi x) on
/// L = T = 1, q = 1. The parameter sigma in (0,1) u (1,2) sets the strength
/// of the t -> 0 singularity of u_t.
inline ProblemSpec manufactured_problem(double alpha, double sigma) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("manufactured_problem: alpha must lie in (0,1)");
    }
    if (!(sigma > 0.0 && sigma < 2.0) || sigma == 1.0) {
        throw std::invalid_argument("manufactured_problem: sigma must lie in (0,1) or (1,2)");
    }
    const double pi = std::acos(-1.0);
    const double pi4m1 = std::pow(pi, 4) - 1.0;
    ProblemSpec p;
    p.alpha = alpha;
    p.q = 1.0;
    p.L = 1.0;
    p.T = 1.0;
    p.f = [=](double x, double t) {
        return (omega(1.0 + sigma - alpha, t) + pi4m1 * omega(1.0 + sigma, t)) * std::sin(pi * x);
    };
    p.fx_left = [=](double t) {
        return pi * (omega(1.0 + sigma - alpha, t) + pi4m1 * omega(1.0 + sigma, t));
    };
    p.fx_right = [=, fxl = p.fx_left](double t) { return -fxl(t); };
    p.u0 = [](double) { return 0.0; };
    p.b0l = [](double) { return 0.0; };
    p.b0r = [](double) { return 0.0; };
    p.b1l = [=](double t) { return pi * omega(1.0 + sigma, t); };
    p.b1r = [=](double t) { return -pi * omega(1.0 + sigma, t); };
    p.cap_b0l = [](double) { return 0.0; };
    p.cap_b0r = [](double) { return 0.0; };
    p.cap_b1l = [=](double t) { return pi * omega(1.0 + sigma - alpha, t); };
    p.cap_b1r = [=](double t) { return -pi * omega(1.0 + sigma - alpha, t); };
    p.exact_u = [=](double x, double t) { return omega(1.0 + sigma, t) * std::sin(pi * x); };
    p.exact_v = [=](double x, double t) { return -pi * pi * omega(1.0 + sigma, t) * std::sin(pi * x); };
    return p;
}

/// Parameters of one manufactured run, as read from a key=value text file:
/// alpha, sigma, gamma, M, N and optional T, L are recognized; '#' starts a
/// comment.
struct ManufacturedRunConfig {
    double alpha = 0.5;
    double sigma = 0.5;
    double gamma = 1.0;
    std::size_t M = 16;
    std::size_t N = 64;
};

inline ManufacturedRunConfig parse_run_config(std::istream& in) {
    ManufacturedRunConfig cfg;
    bool saw_alpha = false, saw_sigma = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("run config line " + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "alpha") { cfg.alpha = std::stod(value); saw_alpha = true; }
            else if (key == "sigma") { cfg.sigma = std::stod(value); saw_sigma = true; }
            else if (key == "gamma") cfg.gamma = std::stod(value);
            else if (key == "M") cfg.M = static_cast<std::size_t>(std::stoul(value));
            else if (key == "N") cfg.N = static_cast<std::size_t>(std::stoul(value));
            else throw std::runtime_error("run config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("run config line " + std::to_string(lineno) + ": bad value '" + value + "'");
        }
    }
    if (!saw_alpha || !saw_sigma) throw std::runtime_error("run config: alpha and sigma are required");
    return cfg;
}

inline ManufacturedRunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_run_config: cannot open " + path);
    return parse_run_config(in);
}

} // namespace subdiff4
