#include <cmath>
#include <fstream>
#include <ostream>

#include "gwp/errors.hpp"
#include "gwp/harness.hpp"
#include "gwp/svg_plot.hpp"

namespace gwp {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& p) {
    out.flush();
    if (!out) throw IoError("write failed for " + p.string());
}

} // namespace

void write_errors_csv(std::ostream& os, const ConvergenceReport& r) {
    std::vector<std::string> names;
    if (r.series.empty())
        names = report_series_names(r.dim);
    else
        for (const auto& s : r.series) names.push_back(s.name);
    os << "eps";
    for (const auto& n : names) os << "," << n;
    os << ",achieved_tol,refinements,points_per_axis,solver_dt,ode_dt_classical,ode_dt_corrected\n";
    for (std::size_t k = 0; k < r.eps.size(); ++k) {
        os << num(r.eps[k]);
        for (const auto& s : r.series) os << "," << num(s.values[k]);
        os << "," << num(r.achieved_tol[k]) << "," << r.refinements[k] << "," << r.points_per_axis[k] << ","
           << num(r.solver_dt[k]) << "," << num(r.ode_dt[0][k]) << "," << num(r.ode_dt[1][k]) << "\n";
    }
}

void write_slopes_csv(std::ostream& os, const ConvergenceReport& r) {
    os << "series,slope,intercept,r_squared,reliable,n_points\n";
    for (const auto& [name, f] : r.slopes)
        os << name << "," << num(f.slope) << "," << num(f.intercept) << "," << num(f.r_squared) << ","
           << (f.reliable ? "true" : "false") << "," << f.used_points << "\n";
    for (const auto& name : r.unfit) os << name << ",nan,nan,nan,false,0\n";
}

std::vector<std::filesystem::path> emit_report(const ConvergenceReport& report, const ExperimentConfig* cfg,
                                               const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;

    if (cfg) {
        const auto p = dir / "config.json";
        auto out = open_out(p);
        nlohmann::json j = config_to_json(*cfg);
        out << j.dump(2) << "\n";
        finish(out, p);
        written.push_back(p);
    }
    {
        const auto p = dir / "errors.csv";
        auto out = open_out(p);
        write_errors_csv(out, report);
        finish(out, p);
        written.push_back(p);
    }
    {
        const auto p = dir / "slopes.csv";
        auto out = open_out(p);
        write_slopes_csv(out, report);
        finish(out, p);
        written.push_back(p);
    }
    if (report.eps.empty()) return written;

    struct Plot {
        const char* file;
        const char* title;
        std::vector<std::string> series;
    };
    std::vector<Plot> plots;
    Plot expv{"expectation_errors.svg", "max_t |z(t) - <z>(t)| vs eps", {}};
    Plot terms{"error_terms.svg", "error decomposition terms vs eps", {}};
    for (int i = 1; i <= report.dim; ++i)
        for (const char* kind : {"pos", "mom"})
            for (const char* f : {"_classical", "_corrected"}) {
                expv.series.push_back(kind + std::to_string(i) + f);
                terms.series.push_back(std::string("term1_") + kind + std::to_string(i) + f);
            }
    plots.push_back(expv);
    plots.push_back({"hamiltonian_gap.svg", "max_t |<H> - H| vs eps", {"gap_classical", "gap_corrected"}});
    plots.push_back({"wavefunction_error.svg", "max_t ||psi - phi0|| vs eps", {"wf_classical", "wf_corrected"}});
    plots.push_back(terms);

    for (const auto& plot : plots) {
        std::vector<PlotSeries> ps;
        for (const auto& name : plot.series) {
            const Series* s = report.find(name);
            if (!s) continue;
            PlotSeries p{name, {}, {}};
            for (std::size_t k = 0; k < report.eps.size(); ++k)
                if (s->values[k] > kFitFloor) {
                    p.x.push_back(report.eps[k]);
                    p.y.push_back(s->values[k]);
                }
            ps.push_back(std::move(p));
        }
        const auto p = dir / plot.file;
        auto out = open_out(p);
        write_loglog_svg(out, plot.title, ps, {1.0, 1.5});
        finish(out, p);
        written.push_back(p);
    }
    return written;
}

} // namespace gwp
