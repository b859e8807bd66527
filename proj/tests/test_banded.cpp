#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "subdiff4/banded.hpp"
#include "support/oracles.hpp"

using subdiff4::BandedLU;
using subdiff4::BandedMatrix;
using subdiff4::SolverError;
using subdiff4::solve_banded;

namespace {
BandedMatrix random_banded(std::size_t n, std::size_t kl, std::size_t ku, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> vals(-1.0, 1.0);
    BandedMatrix m(n, kl, ku);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t jlo = i >= kl ? i - kl : 0;
        const std::size_t jhi = std::min(n - 1, i + ku);
        for (std::size_t j = jlo; j <= jhi; ++j) m.set(i, j, vals(rng));
    }
    return m;
}
} // namespace

TEST_CASE("identity system returns the right-hand side") {
    BandedMatrix eye(7, 0, 0);
    for (std::size_t i = 0; i < 7; ++i) eye.set(i, i, 1.0);
    std::vector<double> rhs{1, -2, 3, -4, 5, -6, 7};
    const auto x = solve_banded(eye, rhs);
    for (std::size_t i = 0; i < 7; ++i) CHECK(x[i] == rhs[i]);
}

TEST_CASE("pentadiagonal solves match a dense oracle") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> vals(-1.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 50;
        BandedMatrix m = random_banded(n, 2, 2, rng);
        for (std::size_t i = 0; i < n; ++i) m.add(i, i, 3.0); // keep it comfortably regular
        std::vector<double> rhs(n);
        for (double& r : rhs) r = vals(rng);

        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) dense[i][j] = m.at(i, j);
        }
        const auto ref = oracles::dense_solve(dense, rhs);
        const auto got = solve_banded(m, rhs);
        double scale = 0.0;
        for (double v : ref) scale = std::max(scale, std::fabs(v));
        for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(got[i] - ref[i]) <= 1e-11 * scale);
    }
}

TEST_CASE("tridiagonal solves match a Thomas-algorithm oracle") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> vals(-1.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 40;
        std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n);
        BandedMatrix m(n, 1, 1);
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = 4.0 + vals(rng);
            m.set(i, i, diag[i]);
            if (i > 0) {
                lower[i] = vals(rng);
                m.set(i, i - 1, lower[i]);
            }
            if (i + 1 < n) {
                upper[i] = vals(rng);
                m.set(i, i + 1, upper[i]);
            }
            rhs[i] = vals(rng);
        }
        // Thomas sweep (no pivoting; diagonally dominant by construction)
        std::vector<double> c(n), d(n);
        c[0] = upper[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double denom = diag[i] - lower[i] * c[i - 1];
            c[i] = upper[i] / denom;
            d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
        }
        std::vector<double> ref(n);
        ref[n - 1] = d[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) ref[i] = d[i] - c[i] * ref[i + 1];

        const auto got = solve_banded(m, rhs);
        double scale = 0.0;
        for (double v : ref) scale = std::max(scale, std::fabs(v));
        for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(got[i] - ref[i]) <= 1e-12 * scale);
    }
}

TEST_CASE("solves satisfy the residual bound") {
    // ||A x - b||_inf <= 1e-11 (||A||_inf ||x||_inf + ||b||_inf)
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> vals(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 60;
        BandedMatrix m = random_banded(n, 2, 2, rng);
        for (std::size_t i = 0; i < n; ++i) m.add(i, i, 2.5);
        std::vector<double> rhs(n);
        for (double& r : rhs) r = vals(rng);
        const auto x = solve_banded(m, rhs);
        const auto ax = m.apply(x);
        double resid = 0.0, xmax = 0.0, bmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            resid = std::max(resid, std::fabs(ax[i] - rhs[i]));
            xmax = std::max(xmax, std::fabs(x[i]));
            bmax = std::max(bmax, std::fabs(rhs[i]));
        }
        CHECK(resid <= 1e-11 * (m.norm_inf() * xmax + bmax));
    }
}

TEST_CASE("pivoting handles zero diagonals") {
    // exactly singular matrices are reported
    BandedMatrix singular(3, 1, 1);
    singular.set(0, 0, 1.0);
    singular.set(1, 1, 0.0);
    singular.set(2, 2, 1.0);
    CHECK_THROWS_AS(solve_banded(singular, {1.0, 1.0, 1.0}), SolverError);

    // a zero diagonal entry with a nonzero subdiagonal must be pivoted through
    BandedMatrix piv(3, 1, 1);
    piv.set(0, 0, 0.0);
    piv.set(0, 1, 1.0);
    piv.set(1, 0, 1.0);
    piv.set(1, 1, 2.0);
    piv.set(2, 1, 1.0);
    piv.set(2, 2, 1.0);
    const auto x = piv.apply({1.0, 2.0, 3.0});
    const auto sol = solve_banded(piv, x);
    CHECK(sol[0] == Catch::Approx(1.0));
    CHECK(sol[1] == Catch::Approx(2.0));
    CHECK(sol[2] == Catch::Approx(3.0));
}
