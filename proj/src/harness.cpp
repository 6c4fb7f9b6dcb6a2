#include "gwp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "gwp/errors.hpp"
#include "gwp/hagedorn_basis.hpp"

namespace gwp {

namespace {

constexpr int kMaxOdeHalvings = 12;
constexpr double kOdeFloor = 1e-12;

PacketExtent extent_of(const std::array<Trajectory, kFlowCount>& trajs) {
    PacketExtent e;
    const int d = trajs[0].states.front().dim();
    e.q_min = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
    e.q_max = -e.q_min;
    for (const auto& tr : trajs)
        for (const auto& s : tr.states) {
            e.q_min = e.q_min.cwiseMin(s.q);
            e.q_max = e.q_max.cwiseMax(s.q);
            e.max_abs_p = std::max(e.max_abs_p, s.p.cwiseAbs().maxCoeff());
            Eigen::JacobiSVD<ComplexMatrix> svq(s.Q), svp(s.P);
            e.max_q_sv = std::max(e.max_q_sv, svq.singularValues()[0]);
            e.max_p_norm = std::max(e.max_p_norm, svp.singularValues()[0]);
        }
    return e;
}

double flow_hamiltonian(Flow f, const PacketParams& s, const PotentialModel& pot) {
    return f == Flow::classical ? hamiltonian_classical(s, pot) : hamiltonian_eps(s, pot);
}

// Richardson estimate of the error of `fine` (step h/2) from the coarse run (step h).
double ode_error_estimate(const Trajectory& coarse, const Trajectory& fine, Flow f, const PotentialModel& pot) {
    double worst = 0.0;
    for (std::size_t k = 0; k < fine.states.size(); ++k) {
        const auto& a = coarse.states[k];
        const auto& b = fine.states[k];
        worst = std::max(worst, (a.q - b.q).cwiseAbs().maxCoeff());
        worst = std::max(worst, (a.p - b.p).cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(flow_hamiltonian(f, a, pot) - flow_hamiltonian(f, b, pot)));
    }
    return worst / 3.0;
}

// Smallest nonzero error signal of one flow against the reference observables.
double smallest_signal(const Trajectory& tr, Flow f, const PotentialModel& pot,
                       const std::vector<TrackedObservables>& obs) {
    const int d = tr.states.front().dim();
    std::vector<double> m(2 * static_cast<std::size_t>(d) + 1, 0.0);
    for (std::size_t k = 0; k < obs.size(); ++k) {
        const auto& s = tr.states[k];
        for (int i = 0; i < d; ++i) {
            m[i] = std::max(m[i], std::abs(s.q[i] - obs[k].position[i]));
            m[d + i] = std::max(m[d + i], std::abs(s.p[i] - obs[k].momentum[i]));
        }
        m[2 * d] = std::max(m[2 * d], std::abs(obs[k].energy - flow_hamiltonian(f, s, pot)));
    }
    return *std::min_element(m.begin(), m.end());
}

} // namespace

CompareResult run_compare(const ExperimentConfig& cfg, double eps, const RunOptions& opts) {
    cfg.validate();
    const PotentialModel& pot = cfg.potential;
    const PacketParams s0 = cfg.initial.at(eps);
    IntegratorConfig ic = cfg.integrator;
    ic.t_end = cfg.t_end;
    ic.snapshots = cfg.snapshots;

    CompareResult res;
    res.eps = eps;
    for (Flow f : kFlows) res.trajectories[flow_slot(f)] = integrate(s0, f, pot, ic);

    GridSizing rule;
    rule.sigmas = cfg.solver.sigmas;
    rule.points_per_period = cfg.solver.points_per_period;
    rule.momentum_sigmas = cfg.solver.momentum_sigmas;
    rule.min_points = cfg.solver.min_points;
    const Grid grid = size_grid(extent_of(res.trajectories), eps, rule);

    SolverConfig sc{grid,
                    cfg.solver.dt,
                    cfg.t_end,
                    res.trajectories[0].times,
                    opts.refine && cfg.solver.refine,
                    cfg.solver.observable_tol,
                    cfg.solver.max_refinements};
    RefinedSolution ref = self_refine([&s0](const Grid& g) { return eval_phi0(s0, g); }, pot, sc);
    res.achieved_tol = ref.achieved_tol;
    res.refinements = ref.refinements;
    res.grid = ref.grid;
    res.solver_dt = ref.dt;

    std::vector<TrackedObservables> obs;
    for (const auto& snap : ref.snapshots) obs.push_back(track(snap.psi, pot));

    for (Flow f : kFlows) {
        const auto slot = flow_slot(f);
        Trajectory coarse = res.trajectories[slot];
        IntegratorConfig level = ic;
        double est = std::numeric_limits<double>::infinity();
        for (int h = 0; h < kMaxOdeHalvings; ++h) {
            level.dt = coarse.dt * 0.5;
            Trajectory fine = integrate(s0, f, pot, level);
            est = ode_error_estimate(coarse, fine, f, pot);
            coarse = std::move(fine);
            double target = ic.refine_until * smallest_signal(coarse, f, pot, obs);
            if (std::isfinite(res.achieved_tol)) target = std::min(target, res.achieved_tol);
            if (est <= std::max(kOdeFloor, target)) break;
        }
        res.ode_dt[slot] = coarse.dt;
        res.ode_error[slot] = est;
        res.trajectories[slot] = std::move(coarse);
    }

    const int d = cfg.dim;
    for (std::size_t k = 0; k < ref.snapshots.size(); ++k) {
        const WaveFunction& psi = ref.snapshots[k].psi;
        CompareRow row;
        row.t = ref.snapshots[k].t;
        row.exp_position = obs[k].position;
        row.exp_momentum = obs[k].momentum;
        row.exp_energy = obs[k].energy;
        for (Flow f : kFlows) {
            const auto slot = flow_slot(f);
            const PacketParams& s = res.trajectories[slot].states[k];
            row.signed_pos_err[slot] = obs[k].position - s.q;
            row.signed_mom_err[slot] = obs[k].momentum - s.p;
            row.pos_err[slot] = row.signed_pos_err[slot].cwiseAbs();
            row.mom_err[slot] = row.signed_mom_err[slot].cwiseAbs();
            row.hamiltonian[slot] = flow_hamiltonian(f, s, pot);
            row.gap[slot] = obs[k].energy - row.hamiltonian[slot];

            const WaveFunction phi0 = eval_phi0_unchecked(s, psi.grid());
            const WaveFunction Z = psi - phi0;
            row.wf_err[slot] = l2_norm(Z);
            row.term1_pos[slot].resize(d);
            row.term2_pos[slot].resize(d);
            row.term1_mom[slot].resize(d);
            row.term2_mom[slot].resize(d);
            for (int i = 0; i < d; ++i) {
                const WaveFunction xphi = apply_position(phi0, i, s.q);
                const WaveFunction xz = apply_position(Z, i, s.q);
                WaveFunction pphi = apply_momentum(phi0, i);
                pphi.values() -= s.p[i] * phi0.values();
                WaveFunction pz = apply_momentum(Z, i);
                pz.values() -= s.p[i] * Z.values();
                row.term1_pos[slot][i] = 2.0 * inner_product(Z, xphi).real();
                row.term2_pos[slot][i] = inner_product(Z, xz).real();
                row.term1_mom[slot][i] = 2.0 * inner_product(Z, pphi).real();
                row.term2_mom[slot][i] = inner_product(Z, pz).real();
            }
        }
        res.rows.push_back(std::move(row));
    }
    return res;
}

void write_compare_csv(std::ostream& os, const CompareResult& res) {
    const int d = res.rows.empty() ? 1 : static_cast<int>(res.rows.front().exp_position.size());
    os << "t";
    for (int i = 1; i <= d; ++i) os << ",exp_x" << i;
    for (int i = 1; i <= d; ++i) os << ",exp_p" << i;
    os << ",exp_H";
    for (Flow f : kFlows) {
        const std::string tag = "_" + to_string(f);
        for (int i = 1; i <= d; ++i) os << ",pos" << i << tag;
        for (int i = 1; i <= d; ++i) os << ",mom" << i << tag;
        os << ",H" << tag << ",gap" << tag << ",wf" << tag;
        for (int i = 1; i <= d; ++i) os << ",term1_pos" << i << tag << ",term2_pos" << i << tag;
        for (int i = 1; i <= d; ++i) os << ",term1_mom" << i << tag << ",term2_mom" << i << tag;
    }
    os << "\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        os << buf;
    };
    for (const auto& r : res.rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.t);
        os << buf;
        for (int i = 0; i < d; ++i) put(r.exp_position[i]);
        for (int i = 0; i < d; ++i) put(r.exp_momentum[i]);
        put(r.exp_energy);
        for (Flow f : kFlows) {
            const auto s = flow_slot(f);
            for (int i = 0; i < d; ++i) put(r.pos_err[s][i]);
            for (int i = 0; i < d; ++i) put(r.mom_err[s][i]);
            put(r.hamiltonian[s]);
            put(r.gap[s]);
            put(r.wf_err[s]);
            for (int i = 0; i < d; ++i) put(r.term1_pos[s][i]), put(r.term2_pos[s][i]);
            for (int i = 0; i < d; ++i) put(r.term1_mom[s][i]), put(r.term2_mom[s][i]);
        }
        os << "\n";
    }
}

FitResult fit_slope(const std::vector<std::pair<double, double>>& points, double floor) {
    std::vector<double> xs, ys;
    for (const auto& [e, err] : points) {
        if (!(e > 0.0) || !std::isfinite(err) || !(err >= floor)) continue;
        xs.push_back(std::log(e));
        ys.push_back(std::log(err));
    }
    const auto n = xs.size();
    if (n < 3)
        throw InsufficientDataError("fit_slope: " + std::to_string(n) + " usable points (need >= 3 above floor)");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx += xs[i], my += ys[i];
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientDataError("fit_slope: all eps values coincide");
    FitResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    r.used_points = static_cast<int>(n);
    r.reliable = r.r_squared >= kReliableR2;
    return r;
}

std::vector<ErrorTermRow> first_error_term_diagnostic(const CompareResult& res, Flow flow) {
    const auto s = flow_slot(flow);
    std::vector<ErrorTermRow> out;
    for (const auto& r : res.rows) {
        ErrorTermRow e;
        e.t = r.t;
        e.term1_pos = r.term1_pos[s];
        e.term2_pos = r.term2_pos[s];
        e.total_pos = r.signed_pos_err[s];
        e.term1_mom = r.term1_mom[s];
        e.term2_mom = r.term2_mom[s];
        e.total_mom = r.signed_mom_err[s];
        e.identity_residual = std::max((e.term1_pos + e.term2_pos - e.total_pos).cwiseAbs().maxCoeff(),
                                       (e.term1_mom + e.term2_mom - e.total_mom).cwiseAbs().maxCoeff());
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ErrorTermRow> first_error_term_diagnostic(const ExperimentConfig& cfg, double eps, Flow flow,
                                                      const RunOptions& opts) {
    return first_error_term_diagnostic(run_compare(cfg, eps, opts), flow);
}

const Series* ConvergenceReport::find(const std::string& name) const {
    for (const auto& s : series)
        if (s.name == name) return &s;
    return nullptr;
}

const FitResult* ConvergenceReport::slope(const std::string& name) const {
    for (const auto& [n, f] : slopes)
        if (n == name) return &f;
    return nullptr;
}

std::vector<std::string> report_series_names(int dim) {
    std::vector<std::string> names;
    const std::array<std::string, 2> tags{"_classical", "_corrected"};
    for (const char* kind : {"pos", "mom"})
        for (int i = 1; i <= dim; ++i)
            for (const auto& t : tags) names.push_back(kind + std::to_string(i) + t);
    names.push_back("gap_classical");
    names.push_back("gap_corrected");
    names.push_back("gap_classical_spread");
    names.push_back("gap_corrected_spread");
    for (const auto& t : tags) names.push_back("wf" + t);
    for (const char* term : {"term1_", "term2_"})
        for (const char* kind : {"pos", "mom"})
            for (int i = 1; i <= dim; ++i)
                for (const auto& t : tags) names.push_back(term + std::string(kind) + std::to_string(i) + t);
    return names;
}

namespace {

// Max over time of each named quantity for one comparison.
std::vector<double> summarize(const CompareResult& res, int dim) {
    std::vector<double> out;
    auto max_of = [&](auto&& get) {
        double m = 0.0;
        for (const auto& r : res.rows) m = std::max(m, std::abs(get(r)));
        return m;
    };
    for (int kind = 0; kind < 2; ++kind)
        for (int i = 0; i < dim; ++i)
            for (Flow f : kFlows) {
                const auto s = flow_slot(f);
                out.push_back(max_of([&](const CompareRow& r) { return kind == 0 ? r.pos_err[s][i] : r.mom_err[s][i]; }));
            }
    for (Flow f : kFlows) out.push_back(max_of([&](const CompareRow& r) { return r.gap[flow_slot(f)]; }));
    for (Flow f : kFlows) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& r : res.rows) {
            lo = std::min(lo, r.gap[flow_slot(f)]);
            hi = std::max(hi, r.gap[flow_slot(f)]);
        }
        out.push_back(res.rows.empty() ? 0.0 : hi - lo);
    }
    for (Flow f : kFlows) out.push_back(max_of([&](const CompareRow& r) { return r.wf_err[flow_slot(f)]; }));
    for (int term = 0; term < 2; ++term)
        for (int kind = 0; kind < 2; ++kind)
            for (int i = 0; i < dim; ++i)
                for (Flow f : kFlows) {
                    const auto s = flow_slot(f);
                    out.push_back(max_of([&](const CompareRow& r) {
                        if (term == 0) return kind == 0 ? r.term1_pos[s][i] : r.term1_mom[s][i];
                        return kind == 0 ? r.term2_pos[s][i] : r.term2_mom[s][i];
                    }));
                }
    return out;
}

bool is_primary(const std::string& name) {
    return name.rfind("pos", 0) == 0 || name.rfind("mom", 0) == 0 || name == "gap_classical" ||
           name == "gap_corrected";
}

} // namespace

ConvergenceReport assemble_report(const ExperimentConfig& cfg, const std::vector<CompareResult>& results) {
    ConvergenceReport rep;
    rep.dim = cfg.dim;
    rep.config_hash = config_hash(cfg);
    const auto names = report_series_names(cfg.dim);
    for (const auto& n : names) rep.series.push_back({n, {}});
    for (const auto& res : results) {
        rep.eps.push_back(res.eps);
        const auto vals = summarize(res, cfg.dim);
        for (std::size_t k = 0; k < names.size(); ++k) rep.series[k].values.push_back(vals[k]);
        rep.achieved_tol.push_back(res.achieved_tol);
        rep.refinements.push_back(res.refinements);
        rep.points_per_axis.push_back(res.grid.points_per_axis().front());
        rep.solver_dt.push_back(res.solver_dt);
        for (Flow f : kFlows) rep.ode_dt[flow_slot(f)].push_back(res.ode_dt[flow_slot(f)]);
    }
    if (rep.eps.empty()) return rep;

    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& s : rep.series)
        if (is_primary(s.name))
            for (double v : s.values) smallest = std::min(smallest, v);
    double worst_tol = 0.0;
    for (double t : rep.achieved_tol) worst_tol = std::isfinite(t) ? std::max(worst_tol, t) : worst_tol;
    const bool unmeasured = std::any_of(rep.achieved_tol.begin(), rep.achieved_tol.end(),
                                        [](double t) { return !std::isfinite(t); });
    rep.contaminated = unmeasured || worst_tol > 0.01 * smallest;

    for (const auto& s : rep.series) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t k = 0; k < rep.eps.size(); ++k) pts.emplace_back(rep.eps[k], s.values[k]);
        try {
            rep.slopes.emplace_back(s.name, fit_slope(pts));
        } catch (const InsufficientDataError&) {
            rep.unfit.push_back(s.name);
        }
    }
    return rep;
}

ConvergenceReport epsilon_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    const auto& eps = cfg.eps_list;
    if (eps.size() < 4 || std::log10(eps.front() / eps.back()) < 1.5 - 1e-9)
        throw ValidationError("epsilon_sweep: need >= 4 eps values spanning >= 1.5 decades");

    std::vector<CompareResult> results(eps.size());
    std::vector<std::exception_ptr> errors(eps.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < eps.size(); k = next++) {
            try {
                results[k] = run_compare(cfg, eps[k], opts);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(eps.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return assemble_report(cfg, results);
}

} // namespace gwp
