#pragma once

// Time meshes (uniform, graded, user-supplied) and the uniform spatial grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace subdiff4 {

/// Increasing time levels 0 = t_0 < t_1 < ... < t_N = T with step and ratio
/// metadata. Immutable after construction.
class TimeMesh {
public:
    /// Uniform mesh t_k = k T / N.
    static TimeMesh uniform(std::size_t num_steps, double final_time) {
        if (num_steps == 0) throw std::invalid_argument("TimeMesh::uniform: N must be >= 1");
        if (!(final_time > 0.0)) throw std::invalid_argument("TimeMesh::uniform: T must be positive");
        std::vector<double> nodes(num_steps + 1);
        for (std::size_t k = 0; k <= num_steps; ++k) {
            nodes[k] = static_cast<double>(k) * final_time / static_cast<double>(num_steps);
        }
        nodes.back() = final_time;
        return TimeMesh(std::move(nodes), 1.0);
    }

    /// Graded mesh t_k = (k/N)^gamma T, gamma >= 1. Steps cluster near t = 0;
    /// gamma = 1 reproduces the uniform mesh.
    static TimeMesh graded(std::size_t num_steps, double final_time, double grading) {
        if (num_steps == 0) throw std::invalid_argument("TimeMesh::graded: N must be >= 1");
        if (!(final_time > 0.0)) throw std::invalid_argument("TimeMesh::graded: T must be positive");
        if (!(grading >= 1.0)) {
            throw std::invalid_argument("TimeMesh::graded: gamma must be >= 1, got " + std::to_string(grading));
        }
        if (grading == 1.0) {
            TimeMesh m = uniform(num_steps, final_time);
            m.grading_ = 1.0;
            return m;
        }
        std::vector<double> nodes(num_steps + 1);
        for (std::size_t k = 0; k <= num_steps; ++k) {
            nodes[k] = std::pow(static_cast<double>(k) / static_cast<double>(num_steps), grading) * final_time;
        }
        nodes.back() = final_time;
        return TimeMesh(std::move(nodes), grading);
    }

    /// Custom mesh from a node list. Only monotonicity and t_0 = 0 are
    /// enforced; the solver accepts any such mesh.
    static TimeMesh from_nodes(std::vector<double> nodes) {
        return TimeMesh(std::move(nodes), std::nullopt);
    }

    /// Reads one node per line (plain text).
    static TimeMesh from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("TimeMesh::from_file: cannot open " + path);
        std::vector<double> nodes;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nodes.push_back(std::stod(line));
        }
        return from_nodes(std::move(nodes));
    }

    /// Writes one node per line with round-trip-exact precision.
    void to_file(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("TimeMesh::to_file: cannot open " + path);
        out.precision(17);
        for (double t : nodes_) out << t << '\n';
    }

    std::size_t num_steps() const { return nodes_.size() - 1; }
    double final_time() const { return nodes_.back(); }
    double node(std::size_t k) const { return nodes_[k]; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// tau_k = t_k - t_{k-1}, 1 <= k <= N.
    double step(std::size_t k) const { return steps_[k - 1]; }
    /// rho_k = tau_k / tau_{k+1}, 1 <= k <= N-1.
    double ratio(std::size_t k) const { return ratios_[k - 1]; }
    double max_step() const { return max_step_; }
    /// Largest adjacent step ratio; 0 for a single-step mesh.
    double max_ratio() const { return max_ratio_; }
    /// Grading exponent, when the mesh was built by uniform() or graded().
    std::optional<double> grading() const { return grading_; }

private:
    TimeMesh(std::vector<double> nodes, std::optional<double> grading)
        : nodes_(std::move(nodes)), grading_(grading) {
        if (nodes_.size() < 2) throw std::invalid_argument("TimeMesh: need at least two nodes");
        if (nodes_.front() != 0.0) throw std::invalid_argument("TimeMesh: t_0 must be 0");
        steps_.resize(nodes_.size() - 1);
        for (std::size_t k = 1; k < nodes_.size(); ++k) {
            steps_[k - 1] = nodes_[k] - nodes_[k - 1];
            if (!(steps_[k - 1] > 0.0)) {
                throw std::invalid_argument("TimeMesh: nodes must be strictly increasing (step "
                                            + std::to_string(k) + ")");
            }
        }
        max_step_ = *std::max_element(steps_.begin(), steps_.end());
        if (steps_.size() > 1) {
            ratios_.resize(steps_.size() - 1);
            for (std::size_t k = 0; k + 1 < steps_.size(); ++k) ratios_[k] = steps_[k] / steps_[k + 1];
            max_ratio_ = *std::max_element(ratios_.begin(), ratios_.end());
        }
    }

    std::vector<double> nodes_;
    std::vector<double> steps_;
    std::vector<double> ratios_;
    double max_step_ = 0.0;
    double max_ratio_ = 0.0;
    std::optional<double> grading_;
};

/// Smallest constants realizing the graded-mesh step bounds: c1 with
/// tau_k <= c1 tau min{1, t_k^{1-1/gamma}} and c2 with t_k <= c2 t_{k-1}
/// (absent for single-step meshes). Diagnostic only; nothing rejects a mesh
/// based on this report.
struct AssGReport {
    double c1 = 0.0;
    std::optional<double> c2;
    double max_ratio = 0.0;
};

inline AssGReport assg_report(const TimeMesh& mesh, double grading) {
    if (!(grading >= 1.0)) throw std::invalid_argument("assg_report: gamma must be >= 1");
    AssGReport rep;
    rep.max_ratio = mesh.max_ratio();
    const double tau = mesh.max_step();
    const double expo = 1.0 - 1.0 / grading;
    for (std::size_t k = 1; k <= mesh.num_steps(); ++k) {
        const double cap = std::min(1.0, std::pow(mesh.node(k), expo));
        rep.c1 = std::max(rep.c1, mesh.step(k) / (tau * cap));
    }
    if (mesh.num_steps() >= 2) {
        double c2 = 0.0;
        for (std::size_t k = 2; k <= mesh.num_steps(); ++k) c2 = std::max(c2, mesh.node(k) / mesh.node(k - 1));
        rep.c2 = c2;
    }
    return rep;
}

/// Uniform spatial grid x_i = i h on [0, L], h = L/M. The boundary closures
/// of the eliminated scheme reference x_3 and x_{M-3}, hence M >= 4.
struct SpatialGrid {
    double length;
    std::size_t subintervals;
    double h;

    SpatialGrid(double L, std::size_t M)
        : length(L), subintervals(M), h(L / static_cast<double>(M)) {
        if (!(L > 0.0)) throw std::invalid_argument("SpatialGrid: L must be positive");
        if (M < 4) throw std::invalid_argument("SpatialGrid: M must be >= 4");
    }

    double node(std::size_t i) const { return static_cast<double>(i) * h; }
    std::size_t num_nodes() const { return subintervals + 1; }

    friend bool operator==(const SpatialGrid& a, const SpatialGrid& b) {
        return a.length == b.length && a.subintervals == b.subintervals;
    }
};

} // namespace subdiff4
