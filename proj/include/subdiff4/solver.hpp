#pragma once

// Fully discrete time stepping: per-step assembly of the eliminated
// pentadiagonal system in u, banded solve, history management, and recovery
// of the auxiliary variable v = u_xx.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subdiff4/banded.hpp"
#include "subdiff4/grid_ops.hpp"
#include "subdiff4/kernels.hpp"
#include "subdiff4/mesh.hpp"
#include "subdiff4/problems.hpp"
#include "subdiff4/specfun.hpp"

namespace subdiff4 {

struct SolverOptions {
    /// Also solve the tridiagonal system for v at every level.
    bool recover_v = false;
    /// Replace missing analytic boundary Caputo derivatives by the L1
    /// operator applied to the boundary-data series. Injects additional
    /// O(tau^{min{2-alpha, gamma sigma}}) error; flagged in the result.
    bool l1_boundary_fallback = false;
    /// Start from these nodal values instead of sampling u0.
    std::optional<std::vector<double>> initial_values;
};

/// Pentadiagonal system over the interior unknowns u_1..u_{M-1} for one step.
struct EliminatedSystem {
    std::size_t step = 0;
    BandedMatrix matrix;
    std::vector<double> rhs;
};

struct SolveResult {
    std::vector<GridFunction> u;  ///< levels 0..N
    std::vector<GridFunction> v;  ///< empty unless recover_v was set
    std::vector<double> step_seconds;
    bool used_l1_boundary_fallback = false;
    /// Sufficient step bound tau <= (4 Gamma(2-alpha) q_+)^{-1/alpha} from the
    /// stability theory; reported, never enforced.
    double step_restriction_limit = std::numeric_limits<double>::infinity();
    bool step_restriction_violated = false;
};

/// One time integration in progress: problem, meshes, history and the
/// precomputed pieces of the eliminated system.
class SolverState {
public:
    SolverState(ProblemSpec problem, TimeMesh mesh, SpatialGrid grid, SolverOptions options = {})
        : problem_(std::move(problem)), mesh_(std::move(mesh)), grid_(grid),
          options_(std::move(options)) {
        problem_.validate();
        if (!problem_.has_analytic_boundary_caputo() && !options_.l1_boundary_fallback) {
            throw std::runtime_error(
                "SolverState: boundary Caputo derivatives missing and no fallback requested");
        }
        use_fallback_ = !problem_.has_analytic_boundary_caputo() && options_.l1_boundary_fallback;
        if (!use_fallback_) hats_ = hat_boundary(problem_);
        build_operators();
        GridFunction u0 = options_.initial_values
                              ? GridFunction(grid_, *options_.initial_values)
                              : GridFunction::sample(grid_, problem_.u0);
        history_.push_back(std::move(u0));
        const double qp = std::max(problem_.q, 0.0);
        if (qp > 0.0) {
            restriction_limit_ =
                std::pow(4.0 * gamma(2.0 - problem_.alpha) * qp, -1.0 / problem_.alpha);
        }
    }

    const ProblemSpec& problem() const { return problem_; }
    const TimeMesh& mesh() const { return mesh_; }
    const SpatialGrid& grid() const { return grid_; }

    /// Replaces the stored history (restart / residual-diagnostic hook).
    /// Levels must live on the solver's grid and cannot exceed N+1 entries.
    void load_history(std::vector<GridFunction> levels) {
        if (levels.empty() || levels.size() > mesh_.num_steps() + 1) {
            throw std::invalid_argument("load_history: need 1..N+1 levels");
        }
        for (const GridFunction& g : levels) {
            if (!(g.grid() == grid_)) throw std::invalid_argument("load_history: grid mismatch");
        }
        history_ = std::move(levels);
    }

    std::size_t current_step() const { return history_.size() - 1; }
    const std::vector<GridFunction>& history() const { return history_; }
    const GridFunction& level(std::size_t n) const { return history_.at(n); }
    bool used_l1_boundary_fallback() const { return use_fallback_; }
    double step_restriction_limit() const { return restriction_limit_; }
    bool step_restriction_violated() const { return mesh_.max_step() > restriction_limit_; }

    /// Assembles the eliminated system for level n; the history must be
    /// complete through n-1.
    EliminatedSystem assemble_step(std::size_t n, const L1Weights& weights) const {
        if (n < 1 || n > mesh_.num_steps()) throw std::invalid_argument("assemble_step: n out of range");
        if (history_.size() < n) throw std::logic_error("assemble_step: history incomplete");
        if (weights.n != n) throw std::invalid_argument("assemble_step: weights are for a different step");

        const std::size_t M = grid_.subintervals;
        const double h = grid_.h;
        const double tn = mesh_.node(n);
        const double a0 = weights.a[0];
        const std::size_t nu = M - 1;

        EliminatedSystem sys{n, BandedMatrix(nu, 2, 2), std::vector<double>(nu, 0.0)};
        for (std::size_t i = 1; i <= M - 1; ++i) {
            const std::size_t jlo = i >= 3 ? i - 2 : 1;
            const std::size_t jhi = std::min(M - 1, i + 2);
            for (std::size_t j = jlo; j <= jhi; ++j) {
                sys.matrix.set(i - 1, j - 1, a0 * s1_->at(i, j) + s0_->at(i, j));
            }
        }

        // source + history load
        GridFunction g = GridFunction::sample(grid_, [&](double x) { return problem_.f(x, tn); });
        accumulate_history(n, weights, g);
        const GridFunction ag = apply_averaged(g);
        const GridFunction aag = apply_averaged(ag);
        for (std::size_t i = 2; i + 2 <= M; ++i) sys.rhs[i - 1] = aag[i];

        const HatValues hv = hat_values(n, weights);
        const double b1l_n = problem_.b1l(tn), b1r_n = problem_.b1r(tn);
        sys.rhs[0] = (19.0 / 36.0) * ag[1] + (1.0 / 18.0) * ag[2]
                     + 2.0 / (h * h * h) * b1l_n - hv.b0l / 12.0 - 7.0 * h / 180.0 * hv.b1l;
        sys.rhs[nu - 1] = (19.0 / 36.0) * ag[M - 1] + (1.0 / 18.0) * ag[M - 2]
                          - 2.0 / (h * h * h) * b1r_n + hv.b0r / 12.0 - 7.0 * h / 180.0 * hv.b1r;

        // Dirichlet condensation of u_0^n and u_M^n
        const double b0l_n = problem_.b0l(tn), b0r_n = problem_.b0r(tn);
        for (std::size_t i = 1; i <= std::min<std::size_t>(2, M - 1); ++i) {
            sys.rhs[i - 1] -= (a0 * s1_->at(i, 0) + s0_->at(i, 0)) * b0l_n;
        }
        for (std::size_t i = std::max(M - 2, std::size_t{1}); i <= M - 1; ++i) {
            sys.rhs[i - 1] -= (a0 * s1_->at(i, M) + s0_->at(i, M)) * b0r_n;
        }
        return sys;
    }

    /// Advances the state by one level.
    void step() {
        const std::size_t n = current_step() + 1;
        if (n > mesh_.num_steps()) throw std::logic_error("step: past the final time level");
        const L1Weights w = l1_weights(mesh_, problem_.alpha, n);
        EliminatedSystem sys = assemble_step(n, w);
        if (!lu_ || cached_a0_ != w.a[0]) {
            lu_.emplace(sys.matrix);
            cached_a0_ = w.a[0];
        }
        std::vector<double> x;
        try {
            x = lu_->solve(std::move(sys.rhs));
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " (time step " + std::to_string(n) + ")");
        }
        const std::size_t M = grid_.subintervals;
        const double tn = mesh_.node(n);
        GridFunction un(grid_);
        un[0] = problem_.b0l(tn);
        un[M] = problem_.b0r(tn);
        for (std::size_t i = 1; i <= M - 1; ++i) un[i] = x[i - 1];
        history_.push_back(std::move(un));
    }

    /// Solves the tridiagonal system A v = dxx u^n with the two closure rows
    /// for the level-n auxiliary variable. Requires u^n in the history.
    GridFunction recover_v(std::size_t n) const {
        if (n >= history_.size()) throw std::logic_error("recover_v: level not computed yet");
        const std::size_t M = grid_.subintervals;
        const double h = grid_.h;
        const double tn = mesh_.node(n);
        const GridFunction& u = history_[n];

        HatValues hv;
        if (n == 0 && use_fallback_) {
            // empty L1 sum: the discrete Caputo derivative vanishes at t_0
            hv.b0l = problem_.q * problem_.b0l(0.0) + problem_.f(0.0, 0.0);
            hv.b0r = problem_.q * problem_.b0r(0.0) + problem_.f(problem_.L, 0.0);
            hv.b1l = problem_.q * problem_.b1l(0.0) + problem_.fx_left(0.0);
            hv.b1r = problem_.q * problem_.b1r(0.0) + problem_.fx_right(0.0);
        } else if (n == 0) {
            hv.b0l = hats_->b0l(0.0);
            hv.b0r = hats_->b0r(0.0);
            hv.b1l = hats_->b1l(0.0);
            hv.b1r = hats_->b1r(0.0);
        } else {
            hv = hat_values(n, l1_weights(mesh_, problem_.alpha, n));
        }

        std::vector<double> rhs(M + 1);
        rhs[0] = 2.0 / (h * h) * (u[1] - u[0]) - 2.0 / h * problem_.b1l(tn)
                 + h * h / 12.0 * hv.b0l + 7.0 * h * h * h / 180.0 * hv.b1l;
        for (std::size_t i = 1; i < M; ++i) rhs[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
        rhs[M] = 2.0 / h * problem_.b1r(tn) - 2.0 / (h * h) * (u[M] - u[M - 1])
                 - h * h / 12.0 * hv.b0r + 7.0 * h * h * h / 180.0 * hv.b1r;
        return GridFunction(grid_, vrec_lu_->solve(std::move(rhs)));
    }

private:
    struct HatValues {
        double b0l = 0.0, b0r = 0.0, b1l = 0.0, b1r = 0.0;
    };

    void build_operators() {
        const std::size_t M = grid_.subintervals;
        const double h = grid_.h;
        const double q = problem_.q;
        const BandedOperator A = averaged_matrix(M);
        const BandedOperator D2 = dxx_matrix(grid_);
        const BandedOperator A2 = compose(A, A);
        const BandedOperator D4 = compose(D2, D2);

        s1_.emplace(M + 1, 2, 2);
        s0_.emplace(M + 1, 2, 2);
        for (std::size_t i = 2; i + 2 <= M; ++i) {
            for (std::size_t j = i - 2; j <= i + 2; ++j) {
                s1_->set(i, j, A2.at(i, j));
                s0_->set(i, j, D4.at(i, j) - q * A2.at(i, j));
            }
        }
        // Boundary-combined rows: (19/36) row 1 + (1/18) row 2 of the averaged
        // operator on the time-derivative/reaction side, plus the closure terms
        // (2/h^4)(u_1 - u_0) - (5/(3h^2)) dxx row 1 + (2/(3h^2)) dxx row 2,
        // mirrored on the right.
        const double c5 = -5.0 / (3.0 * h * h), c2 = 2.0 / (3.0 * h * h);
        for (std::size_t c = 0; c <= 3; ++c) {
            const double w = (19.0 / 36.0) * A.at(1, c) + (1.0 / 18.0) * A.at(2, c);
            double p = c5 * D2.at(1, c) + c2 * D2.at(2, c);
            if (c == 1) p += 2.0 / (h * h * h * h);
            if (c == 0) p -= 2.0 / (h * h * h * h);
            s1_->set(1, c, w);
            s0_->set(1, c, -q * w + p);
        }
        for (std::size_t c = M - 3; c <= M; ++c) {
            const double w = (19.0 / 36.0) * A.at(M - 1, c) + (1.0 / 18.0) * A.at(M - 2, c);
            double p = c5 * D2.at(M - 1, c) + c2 * D2.at(M - 2, c);
            if (c == M - 1) p += 2.0 / (h * h * h * h);
            if (c == M) p -= 2.0 / (h * h * h * h);
            s1_->set(M - 1, c, w);
            s0_->set(M - 1, c, -q * w + p);
        }

        BandedMatrix vrec(M + 1, 1, 1);
        vrec.set(0, 0, 2.0 / 3.0);
        vrec.set(0, 1, 1.0 / 3.0);
        for (std::size_t i = 1; i < M; ++i) {
            vrec.set(i, i - 1, 1.0 / 12.0);
            vrec.set(i, i, 10.0 / 12.0);
            vrec.set(i, i + 1, 1.0 / 12.0);
        }
        vrec.set(M, M - 1, 1.0 / 3.0);
        vrec.set(M, M, 2.0 / 3.0);
        vrec_lu_.emplace(vrec);
    }

    /// g += a0 u^{n-1} - sum_{k=1}^{n-1} a_{n-k} (u^k - u^{k-1})
    void accumulate_history(std::size_t n, const L1Weights& w, GridFunction& g) const {
        const std::size_t m = grid_.num_nodes();
        const double a0 = w.a[0];
        const auto& prev = history_[n - 1];
        for (std::size_t i = 0; i < m; ++i) g[i] += a0 * prev[i];
        for (std::size_t k = 1; k < n; ++k) {
            const double ak = w.a[n - k];
            const auto& uk = history_[k];
            const auto& ukm = history_[k - 1];
            for (std::size_t i = 0; i < m; ++i) g[i] -= ak * (uk[i] - ukm[i]);
        }
    }

    HatValues hat_values(std::size_t n, const L1Weights& w) const {
        const double tn = mesh_.node(n);
        HatValues hv;
        if (!use_fallback_) {
            hv.b0l = hats_->b0l(tn);
            hv.b0r = hats_->b0r(tn);
            hv.b1l = hats_->b1l(tn);
            hv.b1r = hats_->b1r(tn);
            return hv;
        }
        auto l1_of = [&](const TimeFn& b) {
            std::vector<double> series(n + 1);
            for (std::size_t k = 0; k <= n; ++k) series[k] = b(mesh_.node(k));
            return l1_caputo(series, w);
        };
        hv.b0l = problem_.q * problem_.b0l(tn) - l1_of(problem_.b0l) + problem_.f(0.0, tn);
        hv.b0r = problem_.q * problem_.b0r(tn) - l1_of(problem_.b0r) + problem_.f(problem_.L, tn);
        hv.b1l = problem_.q * problem_.b1l(tn) - l1_of(problem_.b1l) + problem_.fx_left(tn);
        hv.b1r = problem_.q * problem_.b1r(tn) - l1_of(problem_.b1r) + problem_.fx_right(tn);
        return hv;
    }

    ProblemSpec problem_;
    TimeMesh mesh_;
    SpatialGrid grid_;
    SolverOptions options_;
    bool use_fallback_ = false;
    std::optional<HatBoundary> hats_;
    std::optional<BandedOperator> s1_, s0_;
    std::optional<BandedLU> vrec_lu_;
    std::vector<GridFunction> history_;
    std::optional<BandedLU> lu_;
    double cached_a0_ = std::numeric_limits<double>::quiet_NaN();
    double restriction_limit_ = std::numeric_limits<double>::infinity();
};

/// Runs the scheme over the whole mesh. Deterministic given its inputs.
inline SolveResult run(const ProblemSpec& problem, const TimeMesh& mesh, const SpatialGrid& grid,
                       const SolverOptions& options = {}) {
    SolverState state(problem, mesh, grid, options);
    SolveResult result;
    result.used_l1_boundary_fallback = state.used_l1_boundary_fallback();
    result.step_restriction_limit = state.step_restriction_limit();
    result.step_restriction_violated = state.step_restriction_violated();
    result.step_seconds.reserve(mesh.num_steps());
    for (std::size_t n = 1; n <= mesh.num_steps(); ++n) {
        const auto tic = std::chrono::steady_clock::now();
        state.step();
        const auto toc = std::chrono::steady_clock::now();
        result.step_seconds.push_back(std::chrono::duration<double>(toc - tic).count());
    }
    if (options.recover_v) {
        result.v.reserve(mesh.num_steps() + 1);
        for (std::size_t n = 0; n <= mesh.num_steps(); ++n) {
            try {
                result.v.push_back(state.recover_v(n));
            } catch (const std::domain_error&) {
                // boundary data singular at t = 0 (e.g. sigma < alpha): record NaNs
                GridFunction nan_v(grid);
                for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
                    nan_v[i] = std::numeric_limits<double>::quiet_NaN();
                }
                result.v.push_back(std::move(nan_v));
            }
        }
    }
    result.u = state.history();
    return result;
}

/// Writes one time level as CSV with columns x,u,v. Requires the run to have
/// recovered v.
inline void export_snapshot(const SolveResult& result, std::size_t level, std::ostream& out) {
    if (level >= result.u.size()) throw std::invalid_argument("export_snapshot: level out of range");
    if (result.v.empty()) throw std::runtime_error("export_snapshot: run did not recover v");
    const GridFunction& u = result.u[level];
    const GridFunction& v = result.v[level];
    out << "x,u,v\n";
    out.precision(17);
    for (std::size_t i = 0; i < u.size(); ++i) {
        out << u.grid().node(i) << ',' << u[i] << ',' << v[i] << '\n';
    }
}

} // namespace subdiff4
