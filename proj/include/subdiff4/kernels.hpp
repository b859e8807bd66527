#pragma once

// Discrete L1 convolution kernels on arbitrary time meshes, the scalar L1
// Caputo operator, the complementary kernels with their summation identity,
// and kernel diagnostics.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "subdiff4/mesh.hpp"
#include "subdiff4/specfun.hpp"

namespace subdiff4 {

/// L1 kernel weights for one step index n: a[j] holds a_j^{(n)} for
/// j = n-k, k = 1..n. Entries are positive and strictly decreasing in j
/// for n >= 2.
struct L1Weights {
    std::size_t n = 0;
    double alpha = 0.0;
    std::vector<double> a;
};

/// a_{n-k}^{(n)} = [omega_{2-a}(t_n - t_{k-1}) - omega_{2-a}(t_n - t_k)] / tau_k,
/// evaluated through power_difference so that adjacent-node cancellation on
/// long meshes does not destroy the late weights.
inline L1Weights l1_weights(const TimeMesh& mesh, double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("l1_weights: alpha must lie in (0,1)");
    }
    if (n < 1 || n > mesh.num_steps()) {
        throw std::invalid_argument("l1_weights: step index out of range");
    }
    L1Weights w;
    w.n = n;
    w.alpha = alpha;
    w.a.resize(n);
    const double g2a = gamma(2.0 - alpha);
    const double tn = mesh.node(n);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t k = 1; k <= n; ++k) {
        // The integration interval is anchored at hi = t_n - t_k with length
        // exactly tau_k; forming the upper end as t_n - t_{k-1} instead would
        // let node rounding distort tiny early intervals on long graded
        // meshes.
        const double hi = tn - mesh.node(k); // 0 for k = n
        const double tau = mesh.step(k);
        if (tau <= 64.0 * eps * hi) {
            // cell below double resolution (e.g. the first steps of a strongly
            // graded mesh seen from late times): the interval average equals
            // the kernel point value to within machine precision
            w.a[n - k] = omega(1.0 - alpha, hi);
        } else {
            // divide by the representable interval length (exact by Sterbenz),
            // not tau itself: the one-ulp mismatch would otherwise swamp the
            // monotonicity gaps of narrow far-history cells
            const double lo = hi + tau;
            w.a[n - k] = power_difference(lo, hi, 1.0 - alpha) / (g2a * (lo - hi));
        }
    }
    return w;
}

/// Discrete Caputo derivative at level n: sum_k a_{n-k}^{(n)} (v_k - v_{k-1}).
/// Exact for piecewise-linear series with breakpoints at the mesh nodes.
inline double l1_caputo(std::span<const double> series, const L1Weights& weights) {
    if (series.size() != weights.n + 1) {
        throw std::invalid_argument("l1_caputo: series length must be n+1");
    }
    double s = 0.0;
    for (std::size_t k = 1; k <= weights.n; ++k) {
        s += weights.a[weights.n - k] * (series[k] - series[k - 1]);
    }
    return s;
}

/// Complementary convolution kernels for step n: p[j] holds p_j^{(n)} for
/// j = n-k. They satisfy sum_{j=k}^{n} p_{n-j}^{(n)} a_{j-k}^{(j)} = 1.
struct ComplementaryWeights {
    std::size_t n = 0;
    std::vector<double> p;
};

namespace detail {
/// All rows a^{(m)} for m = 1..n; row m-1 holds l1_weights(mesh, alpha, m).a.
inline std::vector<std::vector<double>> l1_weight_triangle(const TimeMesh& mesh, double alpha,
                                                           std::size_t n) {
    std::vector<std::vector<double>> tri(n);
    for (std::size_t m = 1; m <= n; ++m) tri[m - 1] = l1_weights(mesh, alpha, m).a;
    return tri;
}

inline ComplementaryWeights complementary_from_triangle(
    const std::vector<std::vector<double>>& tri, std::size_t n) {
    ComplementaryWeights cw;
    cw.n = n;
    cw.p.assign(n, 0.0);
    cw.p[0] = 1.0 / tri[n - 1][0]; // p_0^{(n)} = 1 / a_0^{(n)}
    for (std::size_t j = n - 1; j >= 1; --j) {
        // p_{n-j}^{(n)} = (1/a_0^{(j)}) sum_{k=j+1}^{n} (a_{k-j-1}^{(k)} - a_{k-j}^{(k)}) p_{n-k}^{(n)}
        double s = 0.0;
        for (std::size_t k = j + 1; k <= n; ++k) {
            s += (tri[k - 1][k - j - 1] - tri[k - 1][k - j]) * cw.p[n - k];
        }
        cw.p[n - j] = s / tri[j - 1][0];
    }
    return cw;
}
} // namespace detail

inline ComplementaryWeights complementary_weights(const TimeMesh& mesh, double alpha,
                                                  std::size_t n) {
    if (n < 1 || n > mesh.num_steps()) {
        throw std::invalid_argument("complementary_weights: step index out of range");
    }
    return detail::complementary_from_triangle(detail::l1_weight_triangle(mesh, alpha, n), n);
}

/// Local consistency error of the L1 formula at level n for a series whose
/// exact Caputo derivative is known analytically.
inline double consistency_error(const std::function<double(double)>& exact_caputo,
                                std::span<const double> series, const TimeMesh& mesh, double alpha,
                                std::size_t n) {
    const L1Weights w = l1_weights(mesh, alpha, n);
    return exact_caputo(mesh.node(n)) - l1_caputo(series.subspan(0, n + 1), w);
}

/// Ratios p_{n-j}^{(n)} / int_{t_{j-1}}^{t_j} omega_alpha(t_n - s) ds.
/// The bound ratio <= 1 is an open conjecture; this probe reports the ratios
/// and asserts nothing.
struct ConjectureProbe {
    std::size_t n = 0;
    double max_ratio = 0.0;
    std::size_t argmax_j = 0;
    std::vector<double> ratios; // indexed by j-1, j = 1..n
};

inline ConjectureProbe conjecture_probe(const TimeMesh& mesh, double alpha, std::size_t n) {
    const ComplementaryWeights cw = complementary_weights(mesh, alpha, n);
    ConjectureProbe probe;
    probe.n = n;
    probe.ratios.resize(n);
    const double tn = mesh.node(n);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t j = 1; j <= n; ++j) {
        // int omega_alpha(t_n - s) ds over [t_{j-1}, t_j]
        const double hi = tn - mesh.node(j);
        const double tau = mesh.step(j);
        double integral;
        if (hi == 0.0) {
            integral = std::pow(tau, alpha) / gamma(1.0 + alpha);
        } else if (tau <= 64.0 * eps * hi) {
            integral = omega(alpha, hi) * tau;
        } else {
            integral = power_difference(hi + tau, hi, alpha) / gamma(1.0 + alpha);
        }
        const double r = cw.p[n - j] / integral;
        probe.ratios[j - 1] = r;
        if (r >= probe.max_ratio) {
            probe.max_ratio = r;
            probe.argmax_j = j;
        }
    }
    return probe;
}

} // namespace subdiff4
