// Command-line front end: convergence studies, stability probes, kernel
// checks, and single solves with CSV snapshots.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subdiff4/experiments.hpp"
#include "subdiff4/problems.hpp"
#include "subdiff4/solver.hpp"

namespace {

constexpr int kExitToleranceFailure = 2;

struct StudyCli {
    double alpha = 0.5;
    double sigma = 0.5;
    double gamma = 1.0;
    std::vector<std::size_t> M;
    std::vector<std::size_t> N;
    std::string preset;
    std::string out;
    std::string format = "csv";
    std::size_t jobs = 1;
    bool assert_mode = false;
    double order_tol = 0.25;
};

void write_table(const subdiff4::ConvergenceTable& table, const StudyCli& cli) {
    subdiff4::print_table(table, std::cout);
    if (cli.out.empty()) return;
    std::ofstream f(cli.out);
    if (!f) throw std::runtime_error("cannot open output file " + cli.out);
    if (cli.format == "json") subdiff4::write_json(table, f);
    else subdiff4::write_csv(table, f);
    std::cout << "wrote " << cli.out << '\n';
}

/// Assert mode: the finest measured order must sit within order_tol of the
/// predicted rate.
int check_orders(const subdiff4::ConvergenceTable& table, const StudyCli& cli) {
    if (!cli.assert_mode) return 0;
    if (table.rows.size() < 2 || !table.rows.back().order) {
        std::cerr << "assert: no order available\n";
        return kExitToleranceFailure;
    }
    const double got = *table.rows.back().order;
    if (std::fabs(got - table.predicted) > cli.order_tol) {
        std::cerr << "assert: order " << got << " deviates from predicted " << table.predicted
                  << " by more than " << cli.order_tol << '\n';
        return kExitToleranceFailure;
    }
    std::cout << "assert: order " << got << " within " << cli.order_tol << " of predicted "
              << table.predicted << '\n';
    return 0;
}

void add_study_flags(CLI::App* cmd, StudyCli& cli) {
    cmd->add_option("--alpha", cli.alpha, "fractional order in (0,1)");
    cmd->add_option("--sigma", cli.sigma, "solution regularity parameter");
    cmd->add_option("--gamma", cli.gamma, "time-mesh grading exponent (>= 1)");
    cmd->add_option("--preset", cli.preset, "parameter preset: paper or desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("--out", cli.out, "output file path");
    cmd->add_option("--format", cli.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--jobs", cli.jobs, "worker pool size for independent runs");
    cmd->add_flag("--assert", cli.assert_mode, "exit 2 unless the finest order matches the prediction");
    cmd->add_option("--order-tol", cli.order_tol, "tolerance used by --assert (default 0.25)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourth-order compact solver for the fourth-order subdiffusion equation"};
    app.require_subcommand(1);

    // ---- spatial -----------------------------------------------------------
    StudyCli sp;
    sp.alpha = 0.3; sp.sigma = 1.3; sp.gamma = 2.0;
    CLI::App* spatial = app.add_subcommand("spatial", "spatial convergence study (one run per M)");
    add_study_flags(spatial, sp);
    auto* sp_m = spatial->add_option("-M", sp.M, "spatial subinterval counts (repeatable)");
    auto* sp_n = spatial->add_option("-N", sp.N, "time step count (single value)");

    // ---- temporal ----------------------------------------------------------
    StudyCli tp;
    tp.alpha = 0.5; tp.sigma = 0.3; tp.gamma = 5.0;
    CLI::App* temporal = app.add_subcommand("temporal", "temporal convergence study (one run per N)");
    add_study_flags(temporal, tp);
    auto* tp_m = temporal->add_option("-M", tp.M, "spatial subinterval count (single value)");
    auto* tp_n = temporal->add_option("-N", tp.N, "time step counts (repeatable)");

    // ---- stability ---------------------------------------------------------
    struct {
        double alpha = 0.5, sigma = 1.3, gamma = 2.0, delta = 1e-6;
        std::size_t M = 16;
        std::vector<std::size_t> N{64, 128, 256};
        std::uint64_t seed = 12345;
        std::string out, format = "csv";
        bool assert_mode = false;
    } st;
    CLI::App* stability = app.add_subcommand("stability", "perturbation amplification under refinement");
    stability->add_option("--alpha", st.alpha, "fractional order");
    stability->add_option("--sigma", st.sigma, "regularity parameter");
    stability->add_option("--gamma", st.gamma, "grading exponent");
    stability->add_option("-M", st.M, "spatial subinterval count");
    stability->add_option("-N", st.N, "time step counts, coarse to fine (repeatable)");
    stability->add_option("--delta", st.delta, "perturbation scale");
    stability->add_option("--seed", st.seed, "RNG seed for the initial-data perturbation");
    stability->add_option("--out", st.out, "output file path");
    stability->add_option("--format", st.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    stability->add_flag("--assert", st.assert_mode, "exit 2 if any amplification ratio grows more than 5%");

    // ---- kernels-check -----------------------------------------------------
    struct {
        std::size_t count = 100, max_steps = 200;
        std::uint64_t seed = 12345;
        bool assert_mode = false;
    } kc;
    CLI::App* kernels = app.add_subcommand("kernels-check", "kernel identity battery on random meshes");
    kernels->add_option("--count", kc.count, "number of random meshes");
    kernels->add_option("--max-steps", kc.max_steps, "largest mesh size drawn");
    kernels->add_option("--seed", kc.seed, "RNG seed");
    kernels->add_flag("--assert", kc.assert_mode, "exit 2 on any identity violation");

    // ---- solve -------------------------------------------------------------
    struct {
        std::string problem_file, mesh_in, mesh_out, snapshot_out;
        double alpha = 0.5, sigma = 0.5, gamma = 1.0;
        std::size_t M = 16, N = 64;
        std::vector<std::size_t> levels;
        bool fallback = false;
    } sv;
    CLI::App* solve = app.add_subcommand("solve", "single manufactured run with CSV snapshots");
    solve->add_option("--problem-file", sv.problem_file, "key=value run configuration file");
    solve->add_option("--alpha", sv.alpha, "fractional order");
    solve->add_option("--sigma", sv.sigma, "regularity parameter");
    solve->add_option("--gamma", sv.gamma, "grading exponent");
    auto* sv_m = solve->add_option("-M", sv.M, "spatial subinterval count");
    auto* sv_n = solve->add_option("-N", sv.N, "time step count");
    solve->add_option("--mesh-in", sv.mesh_in, "read the time mesh from a node-per-line file");
    solve->add_option("--mesh-out", sv.mesh_out, "write the time mesh to a node-per-line file");
    solve->add_option("--snapshot-out", sv.snapshot_out, "base path for x,u,v snapshot CSV files");
    solve->add_option("--levels", sv.levels, "time levels to snapshot (default: final level)");
    solve->add_flag("--fallback-caputo", sv.fallback,
                    "evaluate boundary Caputo data by the L1 operator (flagged, extra error)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*spatial) {
            std::size_t N = 5000;
            std::vector<std::size_t> Ms{8, 16, 32};
            if (sp.preset == "paper") {
                N = 10000;
                Ms = {8, 16, 32, 64};
            }
            if (sp_n->count()) N = sp.N.at(0);
            if (sp_m->count()) Ms = sp.M;
            const auto table = subdiff4::spatial_study(sp.alpha, sp.sigma, sp.gamma, N, Ms, sp.jobs);
            write_table(table, sp);
            return check_orders(table, sp);
        }
        if (*temporal) {
            std::size_t M = 100;
            std::vector<std::size_t> Ns{1024, 2048, 4096};
            if (tp.preset == "paper") {
                M = 600;
                Ns = {1024, 2048, 4096, 8192};
            }
            if (tp_m->count()) M = tp.M.at(0);
            if (tp_n->count()) Ns = tp.N;
            const auto table = subdiff4::temporal_study(tp.alpha, tp.sigma, tp.gamma, M, Ns, tp.jobs);
            write_table(table, tp);
            return check_orders(table, tp);
        }
        if (*stability) {
            const auto reports = subdiff4::stability_refinement(st.alpha, st.sigma, st.gamma, st.M,
                                                                st.N, st.delta, st.seed);
            std::printf("stability probe: delta=%g M=%zu\n", st.delta, st.M);
            std::printf("%9s %7s %14s %14s\n", "mode", "N", "l2_ratio", "h2_ratio");
            for (const auto& rep : reports) {
                for (const auto& m : rep.modes) {
                    std::printf("%9s %7zu %14.6e %14.6e\n", m.mode.c_str(), rep.N,
                                m.l2_ratio.value_or(0.0), m.h2_ratio.value_or(0.0));
                }
            }
            const double growth = subdiff4::max_ratio_growth(reports);
            std::printf("max ratio growth between refinements: %.4f\n", growth);
            if (!st.out.empty()) {
                std::ofstream f(st.out);
                if (!f) throw std::runtime_error("cannot open output file " + st.out);
                if (st.format == "json") {
                    nlohmann::json j;
                    j["delta"] = st.delta;
                    j["max_growth"] = growth;
                    j["reports"] = nlohmann::json::array();
                    for (const auto& rep : reports) {
                        for (const auto& m : rep.modes) {
                            j["reports"].push_back({{"mode", m.mode},
                                                    {"N", rep.N},
                                                    {"l2_ratio", m.l2_ratio.value_or(0.0)},
                                                    {"h2_ratio", m.h2_ratio.value_or(0.0)}});
                        }
                    }
                    f << j.dump(2) << '\n';
                } else {
                    f << "mode,N,l2_ratio,h2_ratio\n";
                    for (const auto& rep : reports) {
                        for (const auto& m : rep.modes) {
                            f << m.mode << ',' << rep.N << ','
                              << subdiff4::detail::format_double(m.l2_ratio.value_or(0.0)) << ','
                              << subdiff4::detail::format_double(m.h2_ratio.value_or(0.0)) << '\n';
                        }
                    }
                }
                std::cout << "wrote " << st.out << '\n';
            }
            if (st.assert_mode && growth > 1.05) {
                std::cerr << "assert: amplification ratio growth " << growth << " exceeds 1.05\n";
                return kExitToleranceFailure;
            }
            return 0;
        }
        if (*kernels) {
            const auto rep = subdiff4::kernels_check(kc.count, kc.max_steps, kc.seed);
            std::printf("kernel battery over %zu random meshes (seed %llu)\n", rep.meshes,
                        static_cast<unsigned long long>(kc.seed));
            std::printf("  positivity violations:    %zu\n", rep.positivity_violations);
            std::printf("  monotonicity violations:  %zu\n", rep.monotonicity_violations);
            std::printf("  sandwich violations:      %zu\n", rep.sandwich_violations);
            std::printf("  summation-identity viol.: %zu (worst |dev| %.3e)\n",
                        rep.identity_violations, rep.worst_identity_deviation);
            std::printf("  kernel-bound violations:  %zu\n", rep.bound_violations);
            std::printf("  largest conjecture ratio: %.6f (informational)\n", rep.worst_conjecture_ratio);
            if (kc.assert_mode && !rep.clean()) {
                std::cerr << "assert: kernel identity violations present\n";
                return kExitToleranceFailure;
            }
            return 0;
        }
        if (*solve) {
            if (!sv.problem_file.empty()) {
                const auto cfg = subdiff4::load_run_config(sv.problem_file);
                sv.alpha = cfg.alpha;
                sv.sigma = cfg.sigma;
                sv.gamma = cfg.gamma;
                if (!sv_m->count()) sv.M = cfg.M;
                if (!sv_n->count()) sv.N = cfg.N;
            }
            const auto problem = subdiff4::manufactured_problem(sv.alpha, sv.sigma);
            subdiff4::TimeMesh mesh = sv.mesh_in.empty()
                                          ? subdiff4::TimeMesh::graded(sv.N, problem.T, sv.gamma)
                                          : subdiff4::TimeMesh::from_file(sv.mesh_in);
            if (!sv.mesh_out.empty()) {
                mesh.to_file(sv.mesh_out);
                std::cout << "wrote " << sv.mesh_out << '\n';
            }
            const subdiff4::SpatialGrid grid(problem.L, sv.M);
            subdiff4::SolverOptions opt;
            opt.recover_v = !sv.snapshot_out.empty();
            opt.l1_boundary_fallback = sv.fallback;
            const auto result = subdiff4::run(problem, mesh, grid, opt);
            if (result.used_l1_boundary_fallback) {
                std::cout << "note: boundary Caputo data evaluated by the L1 fallback\n";
            }
            if (result.step_restriction_violated) {
                std::cout << "warning: max step exceeds the sufficient stability bound "
                          << result.step_restriction_limit << '\n';
            }
            const double err = subdiff4::measure_error(result, *problem.exact_u, mesh);
            std::printf("run: alpha=%g sigma=%g gamma=%g M=%zu N=%zu  max error %.6e\n", sv.alpha,
                        sv.sigma, sv.gamma, sv.M, mesh.num_steps(), err);
            if (!sv.snapshot_out.empty()) {
                std::vector<std::size_t> levels = sv.levels;
                if (levels.empty()) levels.push_back(mesh.num_steps());
                for (std::size_t lvl : levels) {
                    const std::string path = sv.snapshot_out + "_n" + std::to_string(lvl) + ".csv";
                    std::ofstream f(path);
                    if (!f) throw std::runtime_error("cannot open output file " + path);
                    subdiff4::export_snapshot(result, lvl, f);
                    std::cout << "wrote " << path << '\n';
                }
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
