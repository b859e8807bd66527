#pragma once

// Convergence-study orchestration: error measurement, dyadic order
// computation, spatial/temporal studies with a bounded worker pool,
// perturbation-based stability probes, kernel-identity batteries, and
// CSV/JSON reporting.

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "subdiff4/kernels.hpp"
#include "subdiff4/problems.hpp"
#include "subdiff4/solver.hpp"

namespace subdiff4 {

enum class StudyAxis { spatial, temporal };

struct StudyParams {
    double alpha = 0.5;
    double sigma = 0.5;
    double gamma = 1.0;
    double q = 1.0;
};

struct TableRow {
    std::size_t M = 0;
    std::size_t N = 0;
    double error = 0.0;
    std::optional<double> order;
};

struct ConvergenceTable {
    StudyAxis axis = StudyAxis::spatial;
    StudyParams params;
    double predicted = 0.0;
    std::vector<TableRow> rows;
};

/// max over n >= 1 of the nodal max-norm error against the exact solution.
inline double measure_error(const SolveResult& result,
                            const SpaceTimeFn& exact, const TimeMesh& mesh) {
    if (!exact) throw std::runtime_error("measure_error: no exact solution available");
    double e = 0.0;
    for (std::size_t n = 1; n < result.u.size(); ++n) {
        const GridFunction& u = result.u[n];
        const double tn = mesh.node(n);
        for (std::size_t i = 0; i < u.size(); ++i) {
            e = std::max(e, std::fabs(u[i] - exact(u.grid().node(i), tn)));
        }
    }
    return e;
}

/// Dyadic convergence rate log2(e_coarse / e_fine); absent when either error
/// vanishes or is negative.
inline std::optional<double> order(double e_coarse, double e_fine) {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0)) return std::nullopt;
    return std::log2(e_coarse / e_fine);
}

namespace detail {
/// Runs fn(0..count-1) on up to `jobs` threads. Results land in caller-owned
/// slots, so output order is independent of scheduling.
inline void run_indexed(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}
} // namespace detail

/// One manufactured-problem run per M; errors and dyadic orders tabulated.
inline ConvergenceTable spatial_study(double alpha, double sigma, double gamma, std::size_t N,
                                      const std::vector<std::size_t>& M_list, std::size_t jobs = 1) {
    ConvergenceTable table;
    table.axis = StudyAxis::spatial;
    table.params = {alpha, sigma, gamma, 1.0};
    table.predicted = 4.0;
    table.rows.resize(M_list.size());
    const ProblemSpec problem = manufactured_problem(alpha, sigma);
    const TimeMesh mesh = TimeMesh::graded(N, problem.T, gamma);
    detail::run_indexed(M_list.size(), jobs, [&](std::size_t i) {
        const SpatialGrid grid(problem.L, M_list[i]);
        const SolveResult result = run(problem, mesh, grid);
        table.rows[i] = {M_list[i], N, measure_error(result, *problem.exact_u, mesh), std::nullopt};
    });
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        table.rows[i].order = order(table.rows[i - 1].error, table.rows[i].error);
    }
    return table;
}

/// One manufactured-problem run per N; errors, orders and the predicted rate
/// min{gamma sigma, 2 - alpha}.
inline ConvergenceTable temporal_study(double alpha, double sigma, double gamma, std::size_t M,
                                       const std::vector<std::size_t>& N_list, std::size_t jobs = 1) {
    ConvergenceTable table;
    table.axis = StudyAxis::temporal;
    table.params = {alpha, sigma, gamma, 1.0};
    table.predicted = std::min(gamma * sigma, 2.0 - alpha);
    table.rows.resize(N_list.size());
    const ProblemSpec problem = manufactured_problem(alpha, sigma);
    const SpatialGrid grid(problem.L, M);
    detail::run_indexed(N_list.size(), jobs, [&](std::size_t i) {
        const TimeMesh mesh = TimeMesh::graded(N_list[i], problem.T, gamma);
        const SolveResult result = run(problem, mesh, grid);
        table.rows[i] = {M, N_list[i], measure_error(result, *problem.exact_u, mesh), std::nullopt};
    });
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        table.rows[i].order = order(table.rows[i - 1].error, table.rows[i].error);
    }
    return table;
}

inline const char* axis_name(StudyAxis a) { return a == StudyAxis::spatial ? "spatial" : "temporal"; }

namespace detail {
/// Shortest representation that round-trips the double exactly.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}
} // namespace detail

/// CSV with pinned header; values carry full (round-trip) double precision.
inline void write_csv(const ConvergenceTable& table, std::ostream& out) {
    using detail::format_double;
    out << "axis,alpha,sigma,gamma,M,N,error,order,predicted\n";
    for (const TableRow& r : table.rows) {
        out << axis_name(table.axis) << ',' << format_double(table.params.alpha) << ','
            << format_double(table.params.sigma) << ',' << format_double(table.params.gamma)
            << ',' << r.M << ',' << r.N << ',' << format_double(r.error) << ',';
        if (r.order) out << format_double(*r.order);
        out << ',' << format_double(table.predicted) << '\n';
    }
}

inline void write_json(const ConvergenceTable& table, std::ostream& out) {
    nlohmann::json j;
    j["axis"] = axis_name(table.axis);
    j["alpha"] = table.params.alpha;
    j["sigma"] = table.params.sigma;
    j["gamma"] = table.params.gamma;
    j["q"] = table.params.q;
    j["predicted"] = table.predicted;
    j["rows"] = nlohmann::json::array();
    for (const TableRow& r : table.rows) {
        nlohmann::json row{{"M", r.M}, {"N", r.N}, {"error", r.error}};
        if (r.order) row["order"] = *r.order;
        else row["order"] = nullptr;
        j["rows"].push_back(std::move(row));
    }
    out << j.dump(2) << '\n';
}

/// Console rendering: errors with 3 significant digits, orders with 2
/// decimals.
inline void print_table(const ConvergenceTable& table, std::ostream& out) {
    out << axis_name(table.axis) << " study: alpha=" << table.params.alpha
        << " sigma=" << table.params.sigma << " gamma=" << table.params.gamma << '\n';
    out << "      M       N      error   order\n";
    for (const TableRow& r : table.rows) {
        std::ostringstream err;
        err << std::scientific << std::setprecision(2) << r.error;
        std::ostringstream ord;
        if (r.order) ord << std::fixed << std::setprecision(2) << *r.order;
        else ord << "--";
        out << std::setw(7) << r.M << ' ' << std::setw(7) << r.N << ' ' << std::setw(10)
            << err.str() << ' ' << std::setw(7) << ord.str() << '\n';
    }
    out << "predicted rate: " << std::fixed << std::setprecision(2) << table.predicted << '\n';
    out.unsetf(std::ios_base::floatfield);
    out << std::setprecision(6);
}

// ---------------------------------------------------------------------------
// Stability probes
// ---------------------------------------------------------------------------

/// Amplification of one perturbation mode: max over n of ||du^n|| / delta in
/// the discrete L2 norm and of ||dxx du^n|| / delta. Absent when delta = 0.
struct StabilityModeReport {
    std::string mode;
    std::optional<double> l2_ratio;
    std::optional<double> h2_ratio;
};

struct StabilityReport {
    double delta = 0.0;
    std::size_t N = 0;
    std::vector<StabilityModeReport> modes;
};

namespace detail {
inline ProblemSpec perturb_source(const ProblemSpec& base, double delta) {
    ProblemSpec p = base;
    const double pi = std::acos(-1.0);
    const SpaceTimeFn f = base.f;
    // sin(3 pi x / L) vanishes at both endpoints: f(0,t), f(L,t) and the
    // boundary loads stay untouched, so this is a pure interior forcing.
    const double L = base.L;
    p.f = [=](double x, double t) { return f(x, t) + delta * std::sin(3.0 * pi * x / L); };
    return p;
}

inline ProblemSpec perturb_boundary(const ProblemSpec& base, double delta) {
    ProblemSpec p = base;
    const double alpha = base.alpha;
    auto bump = [delta](const TimeFn& b) {
        return TimeFn([=](double t) { return b(t) + delta * t; });
    };
    auto bump_cap = [delta, alpha](const TimeFn& c) {
        // d_t^alpha (delta t) = delta omega_{2-alpha}(t)
        return TimeFn([=](double t) { return c(t) + delta * omega(2.0 - alpha, t); });
    };
    p.b0l = bump(base.b0l);
    p.b0r = bump(base.b0r);
    p.b1l = bump(base.b1l);
    p.b1r = bump(base.b1r);
    p.cap_b0l = bump_cap(base.cap_b0l);
    p.cap_b0r = bump_cap(base.cap_b0r);
    p.cap_b1l = bump_cap(base.cap_b1l);
    p.cap_b1r = bump_cap(base.cap_b1r);
    return p;
}
} // namespace detail

/// Runs the base problem and three independently perturbed variants (initial
/// data, interior source, boundary data) and reports amplification ratios.
inline StabilityReport stability_probe(const ProblemSpec& problem, const TimeMesh& mesh,
                                       const SpatialGrid& grid, double delta,
                                       std::uint64_t seed = 12345) {
    if (delta < 0.0) throw std::invalid_argument("stability_probe: delta must be >= 0");
    StabilityReport report;
    report.delta = delta;
    report.N = mesh.num_steps();

    const SolveResult base = run(problem, mesh, grid);
    // The max runs over all levels including n = 0, so a perturbation of the
    // initial data amplifies only if some later level exceeds it.
    auto amplification = [&](const SolveResult& pert) {
        double l2 = 0.0, h2 = 0.0;
        for (std::size_t n = 0; n < base.u.size(); ++n) {
            const GridFunction d = pert.u[n] - base.u[n];
            l2 = std::max(l2, norm_l2(d));
            h2 = std::max(h2, seminorm_h2(d));
        }
        return std::pair{l2, h2};
    };
    auto push = [&](const std::string& mode, const SolveResult& pert) {
        StabilityModeReport m;
        m.mode = mode;
        if (delta > 0.0) {
            const auto [l2, h2] = amplification(pert);
            m.l2_ratio = l2 / delta;
            m.h2_ratio = h2 / delta;
        }
        report.modes.push_back(std::move(m));
    };

    {
        // smooth random profile: a low Fourier sum, normalized to unit max
        // norm. Grid-scale noise would make the measured H2 supremum creep
        // toward its envelope under refinement instead of converging.
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        const double pi = std::acos(-1.0);
        double c[4];
        for (double& cj : c) cj = unit(rng);
        std::vector<double> noise(grid.num_nodes());
        double mx = 0.0;
        for (std::size_t i = 0; i < noise.size(); ++i) {
            const double x = grid.node(i) / problem.L;
            noise[i] = 0.0;
            for (int j = 0; j < 4; ++j) noise[i] += c[j] * std::sin((j + 1) * pi * x);
            mx = std::max(mx, std::fabs(noise[i]));
        }
        std::vector<double> u0(grid.num_nodes());
        for (std::size_t i = 0; i < u0.size(); ++i) {
            u0[i] = problem.u0(grid.node(i)) + delta * noise[i] / mx;
        }
        SolverOptions opt;
        opt.initial_values = std::move(u0);
        push("u0", run(problem, mesh, grid, opt));
    }
    push("source", run(detail::perturb_source(problem, delta), mesh, grid));
    push("boundary", run(detail::perturb_boundary(problem, delta), mesh, grid));
    return report;
}

/// Probe under time-mesh refinement; the acceptance check is that no ratio
/// grows by more than 5% between successive refinements.
inline std::vector<StabilityReport> stability_refinement(double alpha, double sigma, double gamma,
                                                         std::size_t M,
                                                         const std::vector<std::size_t>& N_list,
                                                         double delta, std::uint64_t seed = 12345) {
    const ProblemSpec problem = manufactured_problem(alpha, sigma);
    const SpatialGrid grid(problem.L, M);
    std::vector<StabilityReport> reports;
    reports.reserve(N_list.size());
    for (std::size_t N : N_list) {
        reports.push_back(stability_probe(problem, TimeMesh::graded(N, problem.T, gamma), grid,
                                          delta, seed));
    }
    return reports;
}

/// Largest ratio growth factor between successive refinements, across all
/// modes and both norms.
inline double max_ratio_growth(const std::vector<StabilityReport>& reports) {
    double worst = 0.0;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        for (std::size_t m = 0; m < reports[i].modes.size(); ++m) {
            const auto& cur = reports[i].modes[m];
            const auto& prev = reports[i - 1].modes[m];
            if (cur.l2_ratio && prev.l2_ratio && *prev.l2_ratio > 0.0) {
                worst = std::max(worst, *cur.l2_ratio / *prev.l2_ratio);
            }
            if (cur.h2_ratio && prev.h2_ratio && *prev.h2_ratio > 0.0) {
                worst = std::max(worst, *cur.h2_ratio / *prev.h2_ratio);
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Kernel identity battery
// ---------------------------------------------------------------------------

struct KernelCheckReport {
    std::size_t meshes = 0;
    std::size_t positivity_violations = 0;
    std::size_t monotonicity_violations = 0;
    std::size_t sandwich_violations = 0;
    std::size_t identity_violations = 0; ///< |sum p a - 1| > 1e-12
    double worst_identity_deviation = 0.0;
    std::size_t bound_violations = 0; ///< Lemma-type kernel bound, m = 0 and 1
    double worst_conjecture_ratio = 0.0;

    bool clean() const {
        return positivity_violations == 0 && monotonicity_violations == 0 &&
               sandwich_violations == 0 && identity_violations == 0 && bound_violations == 0;
    }
};

/// Random mesh mix for the kernel batteries: uniform, graded, and jittered
/// (log-uniform step lengths). The default grading cap of 4 keeps the
/// smallest kernel-inequality gaps (~ alpha tau_1 / t_n) resolvable in double
/// precision for meshes up to a few hundred steps; exactness checks against
/// extended-precision references use a smaller cap (the weights' condition
/// number in the node data grows like t_n / tau_1).
inline TimeMesh random_mesh(std::mt19937_64& rng, std::size_t max_steps,
                            double max_grading = 4.0) {
    std::uniform_int_distribution<std::size_t> num(2, max_steps);
    std::uniform_real_distribution<double> tf(0.5, 2.0);
    std::uniform_real_distribution<double> gr(1.0, max_grading);
    std::uniform_real_distribution<double> jitter(-1.5, 1.5);
    const std::size_t N = num(rng);
    const double T = tf(rng);
    switch (rng() % 3) {
    case 0: return TimeMesh::uniform(N, T);
    case 1: return TimeMesh::graded(N, T, gr(rng));
    default: {
        std::vector<double> steps(N);
        double total = 0.0;
        for (double& s : steps) {
            s = std::exp(jitter(rng));
            total += s;
        }
        std::vector<double> nodes(N + 1, 0.0);
        for (std::size_t k = 1; k <= N; ++k) nodes[k] = nodes[k - 1] + steps[k - 1] * (T / total);
        nodes[N] = T;
        return TimeMesh::from_nodes(std::move(nodes));
    }
    }
}

/// Checks kernel positivity, strict decrease, the omega sandwich, the
/// complementary summation identity and the complementary kernel bound on a
/// batch of random meshes.
inline KernelCheckReport kernels_check(std::size_t num_meshes, std::size_t max_steps,
                                       std::uint64_t seed = 12345) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> adist(0.05, 0.95);
    KernelCheckReport rep;
    rep.meshes = num_meshes;
    for (std::size_t m = 0; m < num_meshes; ++m) {
        const TimeMesh mesh = random_mesh(rng, max_steps);
        const double alpha = adist(rng);
        const std::size_t N = mesh.num_steps();
        const auto tri = detail::l1_weight_triangle(mesh, alpha, N);

        for (std::size_t n = 1; n <= N; ++n) {
            const auto& a = tri[n - 1];
            for (double w : a) {
                if (!(w > 0.0)) ++rep.positivity_violations;
            }
            for (std::size_t j = 0; n >= 2 && j + 1 < n; ++j) {
                if (!(a[j] > a[j + 1])) ++rep.monotonicity_violations;
            }
            for (std::size_t k = 1; n >= 2 && k <= n - 1; ++k) {
                const double w = omega(1.0 - alpha, mesh.node(n) - mesh.node(k));
                if (!(a[n - k - 1] > w && w > a[n - k])) ++rep.sandwich_violations;
            }
        }

        for (std::size_t n = 1; n <= N; ++n) {
            const ComplementaryWeights cw = detail::complementary_from_triangle(tri, n);
            for (double p : cw.p) {
                if (!(p >= 0.0)) ++rep.identity_violations;
            }
            for (std::size_t k = 1; k <= n; ++k) {
                double s = 0.0;
                for (std::size_t j = k; j <= n; ++j) s += cw.p[n - j] * tri[j - 1][j - k];
                const double dev = std::fabs(s - 1.0);
                rep.worst_identity_deviation = std::max(rep.worst_identity_deviation, dev);
                if (dev > 1e-12) ++rep.identity_violations;
            }
            for (int mm = 0; mm <= 1; ++mm) {
                double s = 0.0;
                for (std::size_t j = 1; j <= n; ++j) {
                    s += cw.p[n - j] * omega(1.0 + mm * alpha - alpha, mesh.node(j));
                }
                const double bound = omega(1.0 + mm * alpha, mesh.node(n));
                if (s > bound * (1.0 + 1e-10)) ++rep.bound_violations;
            }
        }
        const ConjectureProbe probe = conjecture_probe(mesh, alpha, N);
        rep.worst_conjecture_ratio = std::max(rep.worst_conjecture_ratio, probe.max_ratio);
    }
    return rep;
}

} // namespace subdiff4
