#pragma once

// Grid functions on the spatial grid, the two-point/three-point averaged
// operator, second differences, endpoint-weighted inner products, and banded
// operator algebra.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "subdiff4/mesh.hpp"

namespace subdiff4 {

/// Values v_0..v_M on a SpatialGrid. Operations return new functions; the
/// value array of an existing function is never mutated by them.
class GridFunction {
public:
    explicit GridFunction(const SpatialGrid& grid) : grid_(grid), values_(grid.num_nodes(), 0.0) {}

    GridFunction(const SpatialGrid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid.num_nodes()) {
            throw std::invalid_argument("GridFunction: value count does not match grid");
        }
    }

    /// Samples f at the grid nodes.
    static GridFunction sample(const SpatialGrid& grid, const std::function<double(double)>& f) {
        GridFunction g(grid);
        for (std::size_t i = 0; i < grid.num_nodes(); ++i) g.values_[i] = f(grid.node(i));
        return g;
    }

    const SpatialGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    GridFunction& operator+=(const GridFunction& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        check_same_grid(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    GridFunction& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

    void check_same_grid(const GridFunction& o) const {
        if (!(grid_ == o.grid_)) throw std::invalid_argument("GridFunction: grid mismatch");
    }

private:
    SpatialGrid grid_;
    std::vector<double> values_;
};

/// Averaged operator: (2/3, 1/3) rows at the endpoints, (1, 10, 1)/12 inside.
/// Rows sum to one.
inline GridFunction apply_averaged(const GridFunction& v) {
    const std::size_t M = v.grid().subintervals;
    GridFunction r(v.grid());
    r[0] = (2.0 / 3.0) * v[0] + (1.0 / 3.0) * v[1];
    for (std::size_t i = 1; i < M; ++i) r[i] = (v[i - 1] + 10.0 * v[i] + v[i + 1]) / 12.0;
    r[M] = (2.0 / 3.0) * v[M] + (1.0 / 3.0) * v[M - 1];
    return r;
}

/// Second difference with one-sided boundary rows:
/// (2/h) dx v_{1/2} at i = 0 and -(2/h) dx v_{M-1/2} at i = M.
inline GridFunction apply_dxx(const GridFunction& v) {
    const std::size_t M = v.grid().subintervals;
    const double h2 = v.grid().h * v.grid().h;
    GridFunction r(v.grid());
    r[0] = 2.0 * (v[1] - v[0]) / h2;
    for (std::size_t i = 1; i < M; ++i) r[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    r[M] = -2.0 * (v[M] - v[M - 1]) / h2;
    return r;
}

namespace detail {
// Neumaier-compensated accumulation; the operator-identity tests sit at
// 1e-13..1e-14 relative and plain summation is too noisy there.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};
} // namespace detail

/// Endpoint-weighted discrete inner product
/// (h/2) u_0 v_0 + h sum_{1..M-1} u_i v_i + (h/2) u_M v_M.
inline double inner(const GridFunction& u, const GridFunction& v) {
    u.check_same_grid(v);
    const std::size_t M = u.grid().subintervals;
    detail::CompensatedSum s;
    s.add(0.5 * u[0] * v[0]);
    for (std::size_t i = 1; i < M; ++i) s.add(u[i] * v[i]);
    s.add(0.5 * u[M] * v[M]);
    return u.grid().h * s.value();
}

inline double norm_l2(const GridFunction& v) { return std::sqrt(inner(v, v)); }

inline double norm_max(const GridFunction& v) {
    double m = 0.0;
    for (double x : v.values()) m = std::max(m, std::fabs(x));
    return m;
}

/// H2 seminorm ||dxx v||.
inline double seminorm_h2(const GridFunction& v) { return norm_l2(apply_dxx(v)); }

/// H1 seminorm sqrt(<v, -dxx v>), defined for zero-boundary functions only.
inline double seminorm_h1(const GridFunction& v) {
    const double scale = norm_max(v);
    if (std::fabs(v[0]) > 1e-14 * scale || std::fabs(v[v.size() - 1]) > 1e-14 * scale) {
        throw std::invalid_argument("seminorm_h1: requires zero boundary values");
    }
    const double q = inner(v, -1.0 * apply_dxx(v));
    return std::sqrt(std::max(q, 0.0));
}

/// Square banded matrix with explicit lower/upper bandwidths. Entries outside
/// the band read as zero; writing them is an error.
class BandedOperator {
public:
    BandedOperator(std::size_t n, std::size_t lower, std::size_t upper)
        : n_(n), lower_(lower), upper_(upper), width_(lower + upper + 1), data_(n * width_, 0.0) {}

    static BandedOperator identity(std::size_t n) {
        BandedOperator e(n, 0, 0);
        for (std::size_t i = 0; i < n; ++i) e.set(i, i, 1.0);
        return e;
    }

    std::size_t size() const { return n_; }
    std::size_t lower_bandwidth() const { return lower_; }
    std::size_t upper_bandwidth() const { return upper_; }

    double at(std::size_t i, std::size_t j) const {
        if (!in_band(i, j)) return 0.0;
        return data_[i * width_ + offset(i, j)];
    }
    void set(std::size_t i, std::size_t j, double v) {
        if (!in_band(i, j)) throw std::invalid_argument("BandedOperator::set: outside band");
        data_[i * width_ + offset(i, j)] = v;
    }
    void add(std::size_t i, std::size_t j, double v) {
        if (!in_band(i, j)) throw std::invalid_argument("BandedOperator::add: outside band");
        data_[i * width_ + offset(i, j)] += v;
    }

    std::vector<double> apply(std::span<const double> x) const {
        if (x.size() != n_) throw std::invalid_argument("BandedOperator::apply: size mismatch");
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t jlo = i >= lower_ ? i - lower_ : 0;
            const std::size_t jhi = std::min(n_ - 1, i + upper_);
            double s = 0.0;
            for (std::size_t j = jlo; j <= jhi; ++j) s += data_[i * width_ + offset(i, j)] * x[j];
            y[i] = s;
        }
        return y;
    }

    GridFunction apply(const GridFunction& v) const {
        return GridFunction(v.grid(), apply(v.values()));
    }

    BandedOperator& scale(double s) {
        for (double& d : data_) d *= s;
        return *this;
    }

    /// this + s * other (bandwidths widen as needed).
    BandedOperator add_scaled(const BandedOperator& other, double s) const {
        if (other.n_ != n_) throw std::invalid_argument("BandedOperator::add_scaled: size mismatch");
        BandedOperator r(n_, std::max(lower_, other.lower_), std::max(upper_, other.upper_));
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t jlo = i >= r.lower_ ? i - r.lower_ : 0;
            const std::size_t jhi = std::min(n_ - 1, i + r.upper_);
            for (std::size_t j = jlo; j <= jhi; ++j) r.set(i, j, at(i, j) + s * other.at(i, j));
        }
        return r;
    }

    std::vector<std::vector<double>> to_dense() const {
        std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) d[i][j] = at(i, j);
        return d;
    }

private:
    bool in_band(std::size_t i, std::size_t j) const {
        if (i >= n_ || j >= n_) return false;
        if (j + lower_ < i) return false;
        if (j > i + upper_) return false;
        return true;
    }
    std::size_t offset(std::size_t i, std::size_t j) const { return j + lower_ - i; }

    std::size_t n_, lower_, upper_, width_;
    std::vector<double> data_;
};

/// Exact banded product A*B; bandwidths add.
inline BandedOperator compose(const BandedOperator& a, const BandedOperator& b) {
    if (a.size() != b.size()) throw std::invalid_argument("compose: size mismatch");
    const std::size_t n = a.size();
    BandedOperator c(n, std::min(n - 1, a.lower_bandwidth() + b.lower_bandwidth()),
                     std::min(n - 1, a.upper_bandwidth() + b.upper_bandwidth()));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t klo = i >= a.lower_bandwidth() ? i - a.lower_bandwidth() : 0;
        const std::size_t khi = std::min(n - 1, i + a.upper_bandwidth());
        for (std::size_t k = klo; k <= khi; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            const std::size_t jlo = k >= b.lower_bandwidth() ? k - b.lower_bandwidth() : 0;
            const std::size_t jhi = std::min(n - 1, k + b.upper_bandwidth());
            for (std::size_t j = jlo; j <= jhi; ++j) {
                const double bkj = b.at(k, j);
                if (bkj != 0.0) c.add(i, j, aik * bkj);
            }
        }
    }
    return c;
}

/// Matrix form of the averaged operator on a grid with M subintervals.
inline BandedOperator averaged_matrix(std::size_t M) {
    BandedOperator a(M + 1, 1, 1);
    a.set(0, 0, 2.0 / 3.0);
    a.set(0, 1, 1.0 / 3.0);
    for (std::size_t i = 1; i < M; ++i) {
        a.set(i, i - 1, 1.0 / 12.0);
        a.set(i, i, 10.0 / 12.0);
        a.set(i, i + 1, 1.0 / 12.0);
    }
    a.set(M, M - 1, 1.0 / 3.0);
    a.set(M, M, 2.0 / 3.0);
    return a;
}

/// Matrix form of the second difference with its one-sided boundary rows.
inline BandedOperator dxx_matrix(const SpatialGrid& grid) {
    const std::size_t M = grid.subintervals;
    const double ih2 = 1.0 / (grid.h * grid.h);
    BandedOperator d(M + 1, 1, 1);
    d.set(0, 0, -2.0 * ih2);
    d.set(0, 1, 2.0 * ih2);
    for (std::size_t i = 1; i < M; ++i) {
        d.set(i, i - 1, ih2);
        d.set(i, i, -2.0 * ih2);
        d.set(i, i + 1, ih2);
    }
    d.set(M, M - 1, 2.0 * ih2);
    d.set(M, M, -2.0 * ih2);
    return d;
}

} // namespace subdiff4
