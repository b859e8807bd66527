// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria and tolerances are pinned in code; nothing is read from
// the environment.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "subdiff4/experiments.hpp"
#include "subdiff4/solver.hpp"
#include "support/oracles.hpp"

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
    if (!pass) ++failures;
}

bool within(double value, double reference, double rel) {
    return std::fabs(value - reference) <= rel * std::fabs(reference);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

// 1. Spatial order, sigma = 1.3 (desk scale)
void criterion1() {
    const auto t = subdiff4::spatial_study(0.3, 1.3, 2.0, 5000, {8, 16, 32}, 2);
    bool ok = within(t.rows[0].error, 3.96e-04, 0.02) && within(t.rows[1].error, 2.48e-05, 0.02);
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        ok = ok && t.rows[i].order && *t.rows[i].order >= 3.90 && *t.rows[i].order <= 4.10;
    }
    report(1, ok,
           "spatial errors " + fmt(t.rows[0].error) + "/" + fmt(t.rows[1].error)
               + " vs 3.960e-04/2.480e-05 (2%), orders " + fmt(*t.rows[1].order) + "/"
               + fmt(*t.rows[2].order) + " in [3.90,4.10]");
}

// 2. Spatial order, sigma = 1.7 (desk scale)
void criterion2() {
    const auto t = subdiff4::spatial_study(0.3, 1.7, 2.0, 5000, {8, 16}, 2);
    const bool ok = within(t.rows[0].error, 2.99e-04, 0.02) && t.rows[1].order
                    && *t.rows[1].order >= 3.90 && *t.rows[1].order <= 4.10;
    report(2, ok,
           "spatial error " + fmt(t.rows[0].error) + " vs 2.990e-04 (2%), order "
               + fmt(*t.rows[1].order) + " in [3.90,4.10]");
}

// 3. Temporal order on the strongly graded mesh (desk scale)
void criterion3() {
    const std::vector<std::size_t> Ns{1024, 2048, 4096};

    const auto t5 = subdiff4::temporal_study(0.5, 0.3, 5.0, 100, Ns, 2);
    const double ref5[] = {4.60e-05, 1.66e-05, 5.95e-06};
    const double ord5[] = {1.47, 1.48};
    bool orders5 = true, errors5 = true;
    for (int i = 0; i < 2; ++i) {
        orders5 = orders5 && t5.rows[i + 1].order && std::fabs(*t5.rows[i + 1].order - ord5[i]) <= 0.10;
    }
    for (int i = 0; i < 3; ++i) errors5 = errors5 && within(t5.rows[i].error, ref5[i], 0.05);

    const auto t7 = subdiff4::temporal_study(0.7, 0.3, 5.0, 100, Ns, 2);
    const double ref7[] = {1.72e-04, 7.00e-05, 2.84e-05};
    bool orders7 = true, errors7 = true;
    for (int i = 0; i < 2; ++i) {
        orders7 = orders7 && t7.rows[i + 1].order && std::fabs(*t7.rows[i + 1].order - 1.30) <= 0.10;
    }
    for (int i = 0; i < 3; ++i) errors7 = errors7 && within(t7.rows[i].error, ref7[i], 0.05);

    report(3, orders5 && errors5 && orders7 && errors7,
           "alpha=0.5 orders " + fmt(*t5.rows[1].order) + "/" + fmt(*t5.rows[2].order)
               + " (want 1.47/1.48 +-0.10; " + std::string(orders5 ? "ok" : "off") + "), errors "
               + fmt(t5.rows[0].error) + "/" + fmt(t5.rows[1].error) + "/" + fmt(t5.rows[2].error)
               + " vs 4.600e-05/1.660e-05/5.950e-06 (5%; "
               + std::string(errors5 ? "ok" : "off") + "); alpha=0.7 orders "
               + fmt(*t7.rows[1].order) + "/" + fmt(*t7.rows[2].order) + " (want 1.30 +-0.10; "
               + std::string(orders7 ? "ok" : "off") + "), errors " + fmt(t7.rows[0].error) + "/"
               + fmt(t7.rows[1].error) + "/" + fmt(t7.rows[2].error)
               + " vs 1.720e-04/7.000e-05/2.840e-05 (5%; " + std::string(errors7 ? "ok" : "off")
               + ")");
}

// 4. Temporal order on the uniform mesh (desk scale)
void criterion4() {
    const auto t = subdiff4::temporal_study(0.9, 1.9, 1.0, 100, {128, 256, 512}, 2);
    const double refs[] = {6.56e-06, 3.16e-06, 1.52e-06};
    const double ords[] = {1.05, 1.06};
    bool ok = true;
    for (int i = 0; i < 3; ++i) ok = ok && within(t.rows[i].error, refs[i], 0.03);
    for (int i = 0; i < 2; ++i) {
        ok = ok && t.rows[i + 1].order && std::fabs(*t.rows[i + 1].order - ords[i]) <= 0.08;
    }
    report(4, ok,
           "uniform-mesh errors " + fmt(t.rows[0].error) + "/" + fmt(t.rows[1].error) + "/"
               + fmt(t.rows[2].error) + " vs 6.560e-06/3.160e-06/1.520e-06 (3%), orders "
               + fmt(*t.rows[1].order) + "/" + fmt(*t.rows[2].order) + " vs 1.05/1.06 +-0.08");
}

// 5. Under-graded regime: rate = gamma sigma
void criterion5() {
    const auto t = subdiff4::temporal_study(0.5, 0.3, 4.0, 100, {512, 1024, 2048}, 2);
    bool ok = true;
    for (int i = 0; i < 2; ++i) {
        ok = ok && t.rows[i + 1].order && std::fabs(*t.rows[i + 1].order - 1.20) <= 0.08;
    }
    report(5, ok,
           "orders " + fmt(*t.rows[1].order) + "/" + fmt(*t.rows[2].order)
               + " vs gamma*sigma = 1.20 +-0.08");
}

// 6. Kernel identities on random meshes
void criterion6() {
    const auto rep = subdiff4::kernels_check(100, 200, 12345);
    const bool ok = rep.clean();
    report(6, ok,
           "100 meshes: positivity/monotonicity/sandwich/identity/bound violations "
               + std::to_string(rep.positivity_violations) + "/"
               + std::to_string(rep.monotonicity_violations) + "/"
               + std::to_string(rep.sandwich_violations) + "/"
               + std::to_string(rep.identity_violations) + "/"
               + std::to_string(rep.bound_violations) + ", worst identity dev "
               + fmt(rep.worst_identity_deviation));
}

// 7. Operator properties on random grid functions
void criterion7() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> ms(4, 128);
    std::uniform_real_distribution<double> vals(-1.0, 1.0);
    std::size_t bad_equiv = 0, bad_adjoint = 0, bad_commute = 0, bad_elim = 0;

    auto random_gf = [&](const subdiff4::SpatialGrid& g, bool zero_bc) {
        subdiff4::GridFunction v(g);
        for (std::size_t i = 0; i < g.num_nodes(); ++i) v[i] = vals(rng);
        if (zero_bc) {
            v[0] = 0.0;
            v[g.subintervals] = 0.0;
        }
        return v;
    };

    for (int rep = 0; rep < 500; ++rep) {
        const subdiff4::SpatialGrid g(1.0, ms(rng));
        {
            const auto v = random_gf(g, true);
            const double n2 = subdiff4::inner(v, v);
            const auto av = subdiff4::apply_averaged(v);
            const double an2 = subdiff4::inner(av, av);
            if (!(an2 <= n2 * (1.0 + 1e-12) && an2 >= n2 / 3.0 * (1.0 - 1e-12))) ++bad_equiv;
        }
        {
            // relative to the Cauchy-Schwarz magnitude; the inner products
            // themselves can cancel to near zero for random data
            const auto u = random_gf(g, false), v = random_gf(g, false);
            const auto dv = subdiff4::apply_dxx(v), du = subdiff4::apply_dxx(u);
            const auto au = subdiff4::apply_averaged(u), av = subdiff4::apply_averaged(v);
            const double lhs = subdiff4::inner(dv, au);
            const double rhs = subdiff4::inner(du, av);
            const double scale = subdiff4::norm_l2(dv) * subdiff4::norm_l2(au)
                                 + subdiff4::norm_l2(du) * subdiff4::norm_l2(av);
            if (!(std::fabs(lhs - rhs) <= 1e-13 * scale)) ++bad_adjoint;
        }
        {
            const auto v = random_gf(g, false);
            const auto av = subdiff4::apply_averaged(v);
            const auto dv = subdiff4::apply_dxx(v);
            const double h2 = g.h * g.h;
            const double rhs = h2 * (19.0 / 36.0 * dv[1] + 1.0 / 18.0 * dv[2])
                               + 5.0 / 3.0 * av[1] - 2.0 / 3.0 * av[2];
            if (!(std::fabs(av[0] - rhs) <= 1e-12 * (std::fabs(av[0]) + std::fabs(rhs) + 1e-30))) {
                ++bad_elim;
            }
        }
    }
    // commutation, on level series over a fixed mesh
    const subdiff4::TimeMesh mesh = subdiff4::TimeMesh::graded(10, 1.0, 2.0);
    std::uniform_real_distribution<double> alphas(0.1, 0.9);
    for (int rep = 0; rep < 500; ++rep) {
        const subdiff4::SpatialGrid g(1.0, ms(rng));
        const double alpha = alphas(rng);
        const auto w = subdiff4::l1_weights(mesh, alpha, mesh.num_steps());
        std::vector<subdiff4::GridFunction> lv;
        for (std::size_t k = 0; k <= mesh.num_steps(); ++k) lv.push_back(random_gf(g, false));
        subdiff4::GridFunction dv(g), d_of_av(g);
        double scale = 0.0;
        for (std::size_t k = 1; k <= mesh.num_steps(); ++k) {
            const double ak = w.a[mesh.num_steps() - k];
            double inc_max = 0.0;
            for (std::size_t i = 0; i < g.num_nodes(); ++i) {
                const double inc = lv[k][i] - lv[k - 1][i];
                dv[i] += ak * inc;
                inc_max = std::max(inc_max, std::fabs(inc));
            }
            const auto a1 = subdiff4::apply_averaged(lv[k]);
            const auto a0 = subdiff4::apply_averaged(lv[k - 1]);
            for (std::size_t i = 0; i < g.num_nodes(); ++i) d_of_av[i] += ak * (a1[i] - a0[i]);
            scale += ak * inc_max;
        }
        const auto a_of_dv = subdiff4::apply_averaged(dv);
        for (std::size_t i = 0; i < g.num_nodes(); ++i) {
            if (!(std::fabs(a_of_dv[i] - d_of_av[i]) <= 1e-14 * scale)) {
                ++bad_commute;
                break;
            }
        }
    }
    const bool ok = bad_equiv == 0 && bad_adjoint == 0 && bad_commute == 0 && bad_elim == 0;
    report(7, ok,
           "norm-equivalence/adjoint/commutation/elimination violations "
               + std::to_string(bad_equiv) + "/" + std::to_string(bad_adjoint) + "/"
               + std::to_string(bad_commute) + "/" + std::to_string(bad_elim)
               + " over 500 random draws each");
}

// 8. Formulation equivalence against the dense coupled system
void criterion8() {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> as(0.15, 0.85), qs(-2.0, 2.0), cs(-1.0, 1.0);
    std::size_t bad = 0, total = 0;
    double worst = 0.0;
    for (int draw = 0; draw < 20; ++draw) {
        subdiff4::ProblemSpec p;
        p.alpha = as(rng);
        p.q = qs(rng);
        const double c1 = cs(rng), c2 = cs(rng), c3 = cs(rng), c4 = cs(rng);
        p.f = [=](double x, double t) { return c1 * std::sin(2.0 * x + 0.3) + c2 * t * x + c3; };
        p.fx_left = [=](double t) { return 2.0 * c1 * std::cos(0.3) + c2 * t; };
        p.fx_right = [=](double t) { return 2.0 * c1 * std::cos(2.3) + c2 * t; };
        p.u0 = [=](double x) { return c4 * x * x * (1.0 - x); };
        p.b0l = [=](double t) { return c2 * t; };
        p.b0r = [=](double t) { return c2 * t * t; };
        p.b1l = [=](double t) { return c3 * t; };
        p.b1r = [=](double t) { return c1 + c4 * t; };
        const double alpha = p.alpha;
        p.cap_b0l = [=](double t) { return c2 * subdiff4::omega(2.0 - alpha, t); };
        p.cap_b0r = [=](double t) { return 2.0 * c2 * subdiff4::omega(3.0 - alpha, t); };
        p.cap_b1l = [=](double t) { return c3 * subdiff4::omega(2.0 - alpha, t); };
        p.cap_b1r = [=](double t) { return c4 * subdiff4::omega(2.0 - alpha, t); };

        for (std::size_t M : {6, 8, 12}) {
            for (std::size_t N : {4, 8}) {
                const subdiff4::TimeMesh mesh = subdiff4::TimeMesh::graded(N, 1.0, 2.0);
                const subdiff4::SpatialGrid grid(1.0, M);
                const auto mine = subdiff4::run(p, mesh, grid);
                const auto ref = oracles::coupled_run(p, mesh, M);
                double scale = 0.0;
                for (const auto& lvl : ref.u) {
                    for (double v : lvl) scale = std::max(scale, std::fabs(v));
                }
                for (std::size_t n = 0; n <= N; ++n) {
                    for (std::size_t i = 0; i <= M; ++i) {
                        const double dev = std::fabs(mine.u[n][i] - ref.u[n][i]) / scale;
                        worst = std::max(worst, dev);
                        ++total;
                        if (dev > 1e-10) ++bad;
                    }
                }
            }
        }
    }
    report(8, bad == 0,
           "eliminated vs coupled dense solutions: " + std::to_string(bad) + "/"
               + std::to_string(total) + " entries beyond 1e-10 relative (worst " + fmt(worst)
               + ")");
}

// 9. L1 exactness on piecewise-linear series
void criterion9() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> vals(-2.0, 2.0), as(0.1, 0.9);
    std::size_t bad = 0;
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const subdiff4::TimeMesh m = subdiff4::random_mesh(rng, 60, 2.0);
        const double alpha = as(rng);
        const std::size_t n = m.num_steps();
        std::vector<double> series(n + 1);
        for (double& v : series) v = vals(rng);
        const double exact = oracles::pl_caputo_ref(m, alpha, series, n);
        const auto w = subdiff4::l1_weights(m, alpha, n);
        const double got = subdiff4::l1_caputo(series, w);
        double scale = std::fabs(exact);
        for (std::size_t k = 1; k <= n; ++k) {
            scale = std::max(scale, w.a[n - k] * std::fabs(series[k] - series[k - 1]));
        }
        const double dev = std::fabs(got - exact) / scale;
        worst = std::max(worst, dev);
        if (dev > 1e-12) ++bad;
    }
    report(9, bad == 0,
           "discrete Caputo vs extended-precision Caputo of 50 random piecewise-linear series: "
               + std::to_string(bad) + " beyond 1e-12 relative (worst " + fmt(worst) + ")");
}

// 10. Bounded perturbation amplification under refinement (stands in for the
// stability-theory prefactors, which are out of numerical reach)
void criterion10() {
    const auto reports = subdiff4::stability_refinement(0.5, 1.3, 2.0, 16, {64, 128, 256}, 1e-6);
    const double growth = subdiff4::max_ratio_growth(reports);
    const bool ok = growth <= 1.05;
    std::string detail = "amplification ratio growth " + fmt(growth) + " <= 1.05 across N=64/128/256;";
    for (const auto& rep : reports) {
        detail += " N=" + std::to_string(rep.N) + ":";
        for (const auto& m : rep.modes) detail += " " + m.mode + "=" + fmt(*m.l2_ratio);
        detail += ";";
    }
    report(10, ok, detail);
}

} // namespace

int main() {
    std::printf("acceptance suite (tolerances pinned in code)\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criterion(s) failed\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
