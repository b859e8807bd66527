#pragma once

// Banded LU with partial pivoting (row storage, fill confined to
// lower+upper extra superdiagonals) and a one-shot solve helper.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace subdiff4 {

/// Thrown when a factorization hits an exactly singular pivot.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Square banded matrix for the linear-algebra side (assembly target of the
/// eliminated systems). Independent of BandedOperator so the solver layer
/// carries no operator semantics.
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
        : n_(n), lower_(lower), upper_(upper), width_(lower + upper + 1), data_(n * width_, 0.0) {}

    std::size_t size() const { return n_; }
    std::size_t lower_bandwidth() const { return lower_; }
    std::size_t upper_bandwidth() const { return upper_; }

    double at(std::size_t i, std::size_t j) const {
        return in_band(i, j) ? data_[i * width_ + (j + lower_ - i)] : 0.0;
    }
    void add(std::size_t i, std::size_t j, double v) {
        if (!in_band(i, j)) throw std::invalid_argument("BandedMatrix::add: outside band");
        data_[i * width_ + (j + lower_ - i)] += v;
    }
    void set(std::size_t i, std::size_t j, double v) {
        if (!in_band(i, j)) throw std::invalid_argument("BandedMatrix::set: outside band");
        data_[i * width_ + (j + lower_ - i)] = v;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t jlo = i >= lower_ ? i - lower_ : 0;
            const std::size_t jhi = std::min(n_ - 1, i + upper_);
            double s = 0.0;
            for (std::size_t j = jlo; j <= jhi; ++j) s += at(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    double norm_inf() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double r = 0.0;
            const std::size_t jlo = i >= lower_ ? i - lower_ : 0;
            const std::size_t jhi = std::min(n_ - 1, i + upper_);
            for (std::size_t j = jlo; j <= jhi; ++j) r += std::fabs(at(i, j));
            m = std::max(m, r);
        }
        return m;
    }

private:
    bool in_band(std::size_t i, std::size_t j) const {
        return i < n_ && j < n_ && j + lower_ >= i && j <= i + upper_;
    }

    std::size_t n_, lower_, upper_, width_;
    std::vector<double> data_;

    friend class BandedLU;
};

/// LU factorization of a BandedMatrix with partial pivoting. Row swaps widen
/// the upper band to upper+lower.
class BandedLU {
public:
    explicit BandedLU(const BandedMatrix& m)
        : n_(m.size()), kl_(m.lower_bandwidth()), ku_(m.upper_bandwidth() + m.lower_bandwidth()),
          width_(kl_ + ku_ + 1), data_(n_ * width_, 0.0), pivot_(n_), lmul_(n_ * kl_, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t jlo = i >= m.lower_bandwidth() ? i - m.lower_bandwidth() : 0;
            const std::size_t jhi = std::min(n_ - 1, i + m.upper_bandwidth());
            for (std::size_t j = jlo; j <= jhi; ++j) entry(i, j) = m.at(i, j);
        }
        factor();
    }

    /// Solves A x = b for the factored matrix.
    std::vector<double> solve(std::vector<double> b) const {
        if (b.size() != n_) throw std::invalid_argument("BandedLU::solve: size mismatch");
        for (std::size_t k = 0; k < n_; ++k) {
            if (pivot_[k] != k) std::swap(b[k], b[pivot_[k]]);
            const std::size_t ihi = std::min(n_ - 1, k + kl_);
            for (std::size_t i = k + 1; i <= ihi; ++i) {
                b[i] -= lmul_[k * kl_ + (i - k - 1)] * b[k];
            }
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            double s = b[ii];
            const std::size_t jhi = std::min(n_ - 1, ii + ku_);
            for (std::size_t j = ii + 1; j <= jhi; ++j) s -= entry(ii, j) * b[j];
            b[ii] = s / entry(ii, ii);
        }
        return b;
    }

private:
    double& entry(std::size_t i, std::size_t j) { return data_[i * width_ + (j + kl_ - i)]; }
    double entry(std::size_t i, std::size_t j) const { return data_[i * width_ + (j + kl_ - i)]; }

    void factor() {
        for (std::size_t k = 0; k < n_; ++k) {
            std::size_t p = k;
            const std::size_t ihi = std::min(n_ - 1, k + kl_);
            for (std::size_t i = k + 1; i <= ihi; ++i) {
                if (std::fabs(entry(i, k)) > std::fabs(entry(p, k))) p = i;
            }
            pivot_[k] = p;
            if (entry(p, k) == 0.0) {
                throw SolverError("banded LU: singular pivot at column " + std::to_string(k));
            }
            const std::size_t jhi = std::min(n_ - 1, k + ku_);
            if (p != k) {
                for (std::size_t j = k; j <= jhi; ++j) std::swap(entry(k, j), entry(p, j));
            }
            const double piv = entry(k, k);
            for (std::size_t i = k + 1; i <= ihi; ++i) {
                const double l = entry(i, k) / piv;
                lmul_[k * kl_ + (i - k - 1)] = l;
                if (l != 0.0) {
                    for (std::size_t j = k + 1; j <= jhi; ++j) entry(i, j) -= l * entry(k, j);
                }
                entry(i, k) = 0.0;
            }
        }
    }

    std::size_t n_, kl_, ku_, width_;
    std::vector<double> data_;
    std::vector<std::size_t> pivot_;
    std::vector<double> lmul_;
};

/// One-shot banded solve. The solution satisfies
/// ||A x - b||_inf <= 1e-11 (||A||_inf ||x||_inf + ||b||_inf) on the systems
/// assembled here (pentadiagonal and tridiagonal); the tests pin that bound.
inline std::vector<double> solve_banded(const BandedMatrix& m, std::vector<double> rhs) {
    return BandedLU(m).solve(std::move(rhs));
}

} // namespace subdiff4
