#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwp/errors.hpp"
#include "gwp/harness.hpp"
#include "test_support.hpp"

using namespace gwp;
using namespace gwp::test;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const PotentialModel& pot, nlohmann::json spec, double q0) {
    ExperimentConfig cfg = default_torsional_config();
    cfg.potential = pot;
    cfg.potential_spec = std::move(spec);
    cfg.initial.q = vec({q0});
    cfg.snapshots = 10;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("fit_slope") {
    FitResult f = fit_slope({{1.0, 1.0}, {0.5, 0.5}, {0.25, 0.25}});
    CHECK(f.slope == doctest::Approx(1.0));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.reliable);
    CHECK(f.used_points == 3);

    std::vector<std::pair<double, double>> pts;
    for (double e = 0.1; e > 1e-4; e /= 3) pts.emplace_back(e, std::pow(e, 1.5));
    f = fit_slope(pts);
    CHECK(f.slope == doctest::Approx(1.5));
    CHECK(f.intercept == doctest::Approx(0.0).epsilon(1e-12));

    f = fit_slope({{1.0, 2.0}, {0.5, 1.0}, {0.25, 0.5}, {0.125, 1e-15}});
    CHECK(f.used_points == 3);
    CHECK(f.slope == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_slope({{1.0, 1.0}, {0.5, 0.5}, {0.25, 0.0}}), InsufficientDataError);

    f = fit_slope({{1.0, 1.0}, {0.5, 3.0}, {0.25, 0.2}, {0.125, 2.0}});
    CHECK_FALSE(f.reliable);
}

TEST_CASE("quadratic potentials reproduce expectations exactly") {
    const ExperimentConfig harm = small_config(PotentialModel::harmonic(vec({1.0})), {{"kind", "harmonic"}}, 1.0);
    const CompareResult h = run_compare(harm, 0.1);
    REQUIRE(h.rows.size() == 11);
    for (const auto& r : h.rows)
        for (std::size_t f = 0; f < 2; ++f) {
            CHECK(r.pos_err[f].maxCoeff() < 1e-8);
            CHECK(r.mom_err[f].maxCoeff() < 1e-8);
            CHECK(r.wf_err[f] < 1e-7);
        }
    ExperimentConfig fr = small_config(PotentialModel::free(1), {{"kind", "free"}}, 0.0);
    fr.initial.p = vec({0.5});
    const CompareResult z = run_compare(fr, 0.1);
    for (const auto& r : z.rows)
        for (std::size_t f = 0; f < 2; ++f) {
            CHECK(r.pos_err[f].maxCoeff() < 1e-10);
            CHECK(r.mom_err[f].maxCoeff() < 1e-10);
            CHECK(std::abs(r.gap[flow_slot(Flow::corrected)]) < 1e-10);
        }
}

TEST_CASE("torsional comparison at eps = 1e-2") {
    ExperimentConfig cfg = default_torsional_config();
    const CompareResult res = run_compare(cfg, 1e-2);
    CHECK(res.achieved_tol <= 1e-10);
    CHECK(res.rows.front().t == 0.0);
    CHECK(res.rows.back().t == doctest::Approx(1.0));
    for (const auto& r : res.rows) {
        if (r.t <= 0.2) continue;
        CHECK(r.pos_err[flow_slot(Flow::corrected)][0] < r.pos_err[flow_slot(Flow::classical)][0]);
        CHECK(r.mom_err[flow_slot(Flow::corrected)][0] < r.mom_err[flow_slot(Flow::classical)][0]);
    }
    for (Flow f : kFlows) {
        for (const auto& row : first_error_term_diagnostic(res, f)) CHECK(row.identity_residual < 1e-10);
        CHECK(res.ode_error[flow_slot(f)] <= 1e-2 * 1e-5);
    }
    std::ostringstream os;
    write_compare_csv(os, res);
    const std::string head = os.str().substr(0, os.str().find('\n'));
    CHECK(head.rfind("t,exp_x1,exp_p1,exp_H,pos1_classical,", 0) == 0);
}

TEST_CASE("sweep input validation") {
    ExperimentConfig cfg = default_torsional_config();
    cfg.eps_list = {0.1, 0.05, 0.02};
    CHECK_THROWS_AS(epsilon_sweep(cfg), ValidationError);
    cfg.eps_list = {0.1, 0.05, 0.02, 0.01};
    CHECK_THROWS_AS(epsilon_sweep(cfg), ValidationError);
    cfg.eps_list = {0.1, 0.2, 0.01, 0.001};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("empty report writes header-only csvs and no plots") {
    const fs::path dir = fs::temp_directory_path() / "gwp_empty_report";
    fs::remove_all(dir);
    ConvergenceReport rep;
    const auto files = emit_report(rep, nullptr, dir);
    CHECK(fs::exists(dir / "errors.csv"));
    CHECK(fs::exists(dir / "slopes.csv"));
    for (const auto& f : files) CHECK(f.extension() != ".svg");
    const std::string errors = slurp(dir / "errors.csv");
    CHECK(std::count(errors.begin(), errors.end(), '\n') == 1);
    CHECK(slurp(dir / "slopes.csv") == "series,slope,intercept,r_squared,reliable,n_points\n");
    fs::remove_all(dir);
}

TEST_CASE("report files are deterministic") {
    ExperimentConfig cfg = default_torsional_config();
    cfg.eps_list = geometric_eps(0.25, 0.5, 6);
    cfg.t_end = 0.25;
    cfg.snapshots = 4;
    RunOptions opts;
    opts.refine = false;
    const fs::path a = fs::temp_directory_path() / "gwp_det_a", b = fs::temp_directory_path() / "gwp_det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const ConvergenceReport r1 = epsilon_sweep(cfg, opts);
    opts.jobs = 3;
    const ConvergenceReport r2 = epsilon_sweep(cfg, opts);
    const auto fa = emit_report(r1, &cfg, a);
    emit_report(r2, &cfg, b);
    CHECK(fa.size() >= 5);
    for (const char* name : {"errors.csv", "slopes.csv", "config.json"}) CHECK(slurp(a / name) == slurp(b / name));
    CHECK(r1.contaminated);
    CHECK(r1.config_hash == config_hash(cfg));
    int svgs = 0;
    for (const auto& f : fa) svgs += f.extension() == ".svg";
    CHECK(svgs >= 2);
    for (const auto& name : report_series_names(1)) CHECK(r1.find(name) != nullptr);
    fs::remove_all(a);
    fs::remove_all(b);
}
