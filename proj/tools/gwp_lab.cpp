#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gwp/config.hpp"
#include "gwp/errors.hpp"
#include "gwp/hagedorn_basis.hpp"
#include "gwp/harness.hpp"
#include "gwp/residuals.hpp"

namespace fs = std::filesystem;
using namespace gwp;

namespace {

struct Options {
    std::string config;
    std::string out;
    int jobs = 1;
    bool no_refine = false;
    double eps = 0.0;
};

ExperimentConfig load(const Options& o) {
    ExperimentConfig cfg = o.config.empty() ? default_torsional_config() : load_config(o.config);
    if (!o.out.empty()) cfg.output_dir = o.out;
    return cfg;
}

std::ofstream open_file(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p);
    if (!f) throw IoError("cannot open " + p.string() + " for writing");
    return f;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

Grid basis_grid(const PacketParams& s, int K, int min_points) {
    GridSizing rule;
    rule.min_points = min_points;
    return grid_for_packet(s, K, rule);
}

int cmd_evolve(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const double eps = o.eps > 0.0 ? o.eps : cfg.eps_list.front();
    RunOptions ro;
    ro.refine = !o.no_refine;
    const CompareResult res = run_compare(cfg, eps, ro);
    const fs::path dir = cfg.output_dir;
    {
        auto f = open_file(dir / "compare.csv");
        write_compare_csv(f, res);
    }
    for (Flow fl : kFlows) {
        auto f = open_file(dir / ("trajectory_" + to_string(fl) + ".csv"));
        write_trajectory_csv(f, res.trajectories[flow_slot(fl)], cfg.potential);
    }
    double worst[2][2] = {{0, 0}, {0, 0}};
    for (const auto& r : res.rows)
        for (Flow fl : kFlows) {
            const auto s = flow_slot(fl);
            worst[s][0] = std::max(worst[s][0], r.pos_err[s].maxCoeff());
            worst[s][1] = std::max(worst[s][1], r.mom_err[s].maxCoeff());
        }
    std::cout << "eps " << eps << "  grid " << res.grid.describe() << "  refinements " << res.refinements
              << "  achieved_tol " << sci(res.achieved_tol) << "\n";
    for (Flow fl : kFlows)
        std::cout << "  " << to_string(fl) << ": max position error " << sci(worst[flow_slot(fl)][0])
                  << ", max momentum error " << sci(worst[flow_slot(fl)][1]) << ", ode dt "
                  << sci(res.ode_dt[flow_slot(fl)]) << "\n";
    std::cout << "wrote " << (dir / "compare.csv").string() << "\n";
    return 0;
}

int cmd_sweep(const Options& o) {
    const ExperimentConfig cfg = load(o);
    RunOptions ro;
    ro.refine = !o.no_refine;
    ro.jobs = o.jobs;
    const auto t0 = std::chrono::steady_clock::now();
    const ConvergenceReport rep = epsilon_sweep(cfg, ro);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto files = emit_report(rep, &cfg, cfg.output_dir);
    std::cout << "sweep over " << rep.eps.size() << " eps values in " << sci(secs) << " s, config " << rep.config_hash
              << "\n";
    for (const auto& [name, f] : rep.slopes) {
        if (name.rfind("term", 0) == 0) continue;
        std::printf("  %-24s slope %7.4f  R^2 %.4f%s\n", name.c_str(), f.slope, f.r_squared,
                    f.reliable ? "" : "  (unreliable)");
    }
    for (const auto& name : rep.unfit) std::printf("  %-24s no signal above floor\n", name.c_str());
    if (rep.contaminated) std::cout << "warning: reference tolerance is not below 1% of the smallest error\n";
    for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
    return 0;
}

int cmd_basis_check(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const int K = 4;
    bool ok = true;
    auto report = [&](const std::string& what, double value, double tol) {
        const bool pass = value < tol;
        ok = ok && pass;
        std::printf("  %-34s %.3e  (< %.0e) %s\n", what.c_str(), value, tol, pass ? "ok" : "FAIL");
    };
    for (double eps : cfg.eps_list) {
        const PacketParams s = cfg.initial.at(eps);
        const Grid g = basis_grid(s, K, cfg.solver.min_points);
        std::cout << "eps " << eps << " on " << g.describe() << "\n";
        const BasisSet rec = ladder_recurrence_eval(s, K, g);
        const BasisSet raised = build_basis(s, K, g);
        report("gram deviation (recurrence)", rec.gram_deviation(), 1e-7);
        report("gram deviation (raising)", raised.gram_deviation(), 1e-7);
        report("construction agreement", max_basis_difference(rec, raised), 1e-7);
        double low = 0.0;
        for (const auto& f : apply_lowering(s, rec[MultiIndex(s.dim())])) low = std::max(low, l2_norm(f));
        report("||A phi_0||", low, 1e-8);
        double comm = 0.0;
        const WaveFunction& f = rec[MultiIndex::unit(s.dim(), 0)];
        for (int j = 0; j < s.dim(); ++j)
            for (int k = 0; k < s.dim(); ++k) {
                WaveFunction c = apply_lowering(s, apply_raising(s, f, k), j);
                c -= apply_raising(s, apply_lowering(s, f, j), k);
                if (j == k) c -= f;
                comm = std::max(comm, l2_norm(c));
            }
        report("commutator [A_j, A*_k] - delta", comm, 1e-7);
    }
    if (!o.out.empty()) {
        const PacketParams s = cfg.initial.at(cfg.eps_list.front());
        auto f = open_file(fs::path(cfg.output_dir) / "basis.csv");
        write_basis_csv(f, ladder_recurrence_eval(s, K, basis_grid(s, K, cfg.solver.min_points)));
    }
    if (!ok) throw NumericalError("basis-check: at least one check failed");
    return 0;
}

int cmd_residual_check(const Options& o) {
    const ExperimentConfig cfg = load(o);
    const fs::path path = fs::path(cfg.output_dir) / "residuals.csv";
    auto csv = open_file(path);
    csv << "eps,zeta_norm,xi_zeta_norm,eta_zeta_norm,orthogonality_defect,third_state_error,schrodinger_residual,"
           "eta_zeta_residual,beta_discrepancy,raising_residual,hagedorn_projection_remainder\n";
    bool ok = true;
    for (double eps : cfg.eps_list) {
        const PacketParams s = cfg.initial.at(eps);
        const Grid g = basis_grid(s, 4, cfg.solver.min_points);
        const ZetaNorms zn = zeta_norms(s, cfg.potential, g);
        const double orth = orthogonality_defect(s, cfg.potential, g);
        const double third = third_state_reconstruction_error(s, cfg.potential, g);
        const double schr = std::max(schrodinger_residual(s, Flow::corrected, cfg.potential, 2, g),
                                     schrodinger_residual(s, Flow::classical, cfg.potential, 2, g));
        const double eta = eta_zeta_identity_residual(s, cfg.potential, g);
        const double beta = beta_spectral_discrepancy(s, cfg.potential, g);
        const double raise = raising_evolution_residual(s, Flow::corrected, cfg.potential, eval_phi0(s, g));
        const double proj = (hagedorn_first_excited_projection(s, cfg.potential, g) -
                             hagedorn_projection_limit(s, cfg.potential))
                                .cwiseAbs()
                                .maxCoeff();
        char line[512];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", eps,
                      zn.zeta, zn.xi_zeta, zn.eta_zeta, orth, third, schr, eta, beta, raise, proj);
        csv << line;
        const bool pass = orth < 1e-7 && third < 1e-6 && schr < 1e-6 && eta < 1e-7 && raise < 1e-6;
        ok = ok && pass;
        std::printf("eps %-10.4g orth %.2e third %.2e schr %.2e eta %.2e raise %.2e proj-rem %.2e %s\n", eps, orth,
                    third, schr, eta, raise, proj, pass ? "ok" : "FAIL");
    }
    std::cout << "wrote " << path.string() << "\n";
    if (!ok) throw NumericalError("residual-check: at least one identity failed");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian wave packet dynamics laboratory"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment config (JSON); default: torsional d=1 sweep");
        sub->add_option("--out", o.out, "output directory (overrides the config)");
        sub->add_option("--jobs", o.jobs, "parallel workers over eps")->check(CLI::PositiveNumber);
        sub->add_flag("--no-refine", o.no_refine, "trust the solver config, skip self-refinement");
    };
    auto* evolve = app.add_subcommand("evolve", "compare both flows against the reference at one eps");
    add_common(evolve);
    evolve->add_option("--eps", o.eps, "eps value (default: first of eps_list)");
    auto* sweep = app.add_subcommand("sweep", "eps sweep with slope fits and report files");
    add_common(sweep);
    auto* basis = app.add_subcommand("basis-check", "Hagedorn basis validation");
    add_common(basis);
    auto* resid = app.add_subcommand("residual-check", "residual identity validation");
    add_common(resid);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*evolve) return cmd_evolve(o);
        if (*sweep) return cmd_sweep(o);
        if (*basis) return cmd_basis_check(o);
        if (*resid) return cmd_residual_check(o);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
