#include "gwp/reference_solver.hpp"

#include <cmath>
#include <cstdint>
#include <bit>
#include <cstring>
#include <limits>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "gwp/errors.hpp"

namespace gwp {

namespace {

const cplx I(0.0, 1.0);

} // namespace

void SolverConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("solver: dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("solver: t_end must be >= 0");
    if (snapshot_times.empty()) throw ValidationError("solver: no snapshot times");
    double prev = 0.0;
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        const double t = snapshot_times[k];
        if (t < 0.0 || t > t_end) throw ValidationError("solver: snapshot time outside [0, t_end]");
        if (k > 0 && t <= prev) throw ValidationError("solver: snapshot times must be strictly increasing");
        if (t > prev && dt > t - prev + 1e-12 * std::max(1.0, t))
            throw ValidationError("solver: dt exceeds the snapshot spacing");
        prev = t;
    }
    if (max_refinements < 0) throw ValidationError("solver: negative max_refinements");
    if (refine && !(observable_tol > 0.0)) throw ValidationError("solver: observable_tol must be positive");
}

std::vector<double> uniform_times(double t_end, int intervals) {
    if (intervals < 1) throw ValidationError("uniform_times: need at least one interval");
    std::vector<double> t(static_cast<std::size_t>(intervals) + 1);
    for (int k = 0; k <= intervals; ++k) t[k] = k == intervals ? t_end : k * (t_end / intervals);
    return t;
}

StrangPropagator::StrangPropagator(const Grid& grid, const PotentialModel& pot, double dt, double eps)
    : spectral_(grid), dt_(dt) {
    if (pot.dim() != grid.dim()) throw ValidationError("strang: potential and grid dimensions differ");
    half_potential_.resize(static_cast<Eigen::Index>(grid.size()));
    for_each_point(grid, [&](std::size_t flat, const Eigen::VectorXd& x) {
        half_potential_[static_cast<Eigen::Index>(flat)] = std::exp(-I * (pot.value(x) * dt / (2.0 * eps)));
    });
    const Eigen::VectorXd& k2 = spectral_.wavenumber_squared();
    kinetic_.resize(k2.size());
    for (Eigen::Index i = 0; i < k2.size(); ++i) kinetic_[i] = std::exp(-I * (eps * k2[i] * dt / 2.0));
}

void StrangPropagator::step(ComplexVector& psi) const {
    psi.array() *= half_potential_.array();
    spectral_.forward(psi);
    psi.array() *= kinetic_.array();
    spectral_.backward(psi);
    psi.array() *= half_potential_.array();
}

WaveFunction strang_step(const WaveFunction& psi, const PotentialModel& pot, double dt) {
    StrangPropagator prop(psi.grid(), pot, dt, psi.eps());
    ComplexVector v = psi.values();
    prop.step(v);
    return psi.with_values(std::move(v));
}

std::vector<Snapshot> propagate(const WaveFunction& psi0, const PotentialModel& pot, const SolverConfig& cfg) {
    cfg.validate();
    if (psi0.grid() != cfg.grid) throw GridMismatchError("propagate: initial state is not on " + cfg.grid.describe());
    const double norm0 = l2_norm(psi0);
    std::map<long long, std::unique_ptr<StrangPropagator>> props;
    std::vector<Snapshot> out;
    ComplexVector v = psi0.values();
    double t = 0.0;
    for (double target : cfg.snapshot_times) {
        const double span = target - t;
        if (span > 0.0) {
            const long long m = std::max(1LL, static_cast<long long>(std::ceil(span / cfg.dt - 1e-9)));
            const double h = span / static_cast<double>(m);
            // Key on the bit pattern so equal spans share one propagator.
            long long key;
            std::memcpy(&key, &h, sizeof key);
            auto& prop = props[key];
            if (!prop) prop = std::make_unique<StrangPropagator>(cfg.grid, pot, h, psi0.eps());
            for (long long s = 0; s < m; ++s) prop->step(v);
            t = target;
        }
        WaveFunction psi = psi0.with_values(v);
        const double drift = std::abs(l2_norm(psi) - norm0);
        if (drift > cfg.norm_drift_limit || !psi.all_finite()) {
            std::ostringstream os;
            os << "propagate: norm drift " << drift << " at t = " << t << " on " << cfg.grid.describe();
            throw NumericalError(os.str());
        }
        out.push_back({target, std::move(psi)});
    }
    return out;
}

TrackedObservables track(const WaveFunction& psi, const PotentialModel& pot) {
    const int d = psi.grid().dim();
    TrackedObservables o;
    o.position.resize(d);
    o.momentum.resize(d);
    for (int i = 0; i < d; ++i) {
        o.position[i] = expectation(Observable::position(i), psi);
        o.momentum[i] = expectation(Observable::momentum(i), psi);
    }
    o.energy = expectation(Observable::energy(), psi, &pot);
    return o;
}

namespace {

std::vector<TrackedObservables> track_all(const std::vector<Snapshot>& snaps, const PotentialModel& pot) {
    std::vector<TrackedObservables> out;
    out.reserve(snaps.size());
    for (const auto& s : snaps) out.push_back(track(s.psi, pot));
    return out;
}

double relative_change(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double max_change(const std::vector<TrackedObservables>& a, const std::vector<TrackedObservables>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (Eigen::Index i = 0; i < a[k].position.size(); ++i) {
            worst = std::max(worst, relative_change(a[k].position[i], b[k].position[i]));
            worst = std::max(worst, relative_change(a[k].momentum[i], b[k].momentum[i]));
        }
        worst = std::max(worst, relative_change(a[k].energy, b[k].energy));
    }
    return worst;
}

} // namespace

RefinedSolution self_refine(const InitialState& init, const PotentialModel& pot, const SolverConfig& cfg) {
    cfg.validate();
    RefinedSolution sol;
    sol.grid = cfg.grid;
    sol.dt = cfg.dt;
    sol.snapshots = propagate(init(cfg.grid), pot, cfg);
    sol.achieved_tol = std::nan("");
    if (!cfg.refine) return sol;

    auto prev_obs = track_all(sol.snapshots, pot);
    double last = std::numeric_limits<double>::infinity();
    SolverConfig level = cfg;
    for (int r = 1; r <= cfg.max_refinements; ++r) {
        try {
            level.grid = level.grid.refined();
        } catch (const ValidationError& e) {
            throw BudgetExceededError(std::string("self_refine: grid budget exhausted (") + e.what() + ")", last);
        }
        level.dt *= 0.5;
        auto snaps = propagate(init(level.grid), pot, level);
        auto obs = track_all(snaps, pot);
        last = max_change(obs, prev_obs);
        sol.snapshots = std::move(snaps);
        sol.grid = level.grid;
        sol.dt = level.dt;
        sol.refinements = r;
        sol.achieved_tol = last;
        if (last < cfg.observable_tol) return sol;
        prev_obs = std::move(obs);
    }
    std::ostringstream os;
    os << "self_refine: observables still change by " << last << " after " << cfg.max_refinements
       << " refinements (target " << cfg.observable_tol << ")";
    throw BudgetExceededError(os.str(), last);
}

RefinedSolution self_refine(const WaveFunction& psi0, const PotentialModel& pot, const SolverConfig& cfg) {
    return self_refine([&psi0](const Grid& g) { return prolongate(psi0, g); }, pot, cfg);
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw IoError("read_snapshots_binary: truncated input");
    return v;
}

} // namespace

void write_snapshots_binary(std::ostream& os, const std::vector<Snapshot>& snaps) {
    if (snaps.empty()) throw ValidationError("write_snapshots_binary: no snapshots");
    const Grid& g = snaps.front().psi.grid();
    os.write("GWPSNAP1", 8);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
    for (int n : g.points_per_axis()) put<std::uint32_t>(os, static_cast<std::uint32_t>(n));
    for (int a = 0; a < g.dim(); ++a) put<double>(os, g.center()[a]);
    for (int a = 0; a < g.dim(); ++a) put<double>(os, g.half_width()[a]);
    put<double>(os, snaps.front().psi.eps());
    put<std::uint64_t>(os, snaps.size());
    for (const auto& s : snaps) {
        require_compatible(s.psi, snaps.front().psi, "write_snapshots_binary");
        put<double>(os, s.t);
        for (Eigen::Index i = 0; i < s.psi.values().size(); ++i) {
            put<double>(os, s.psi.values()[i].real());
            put<double>(os, s.psi.values()[i].imag());
        }
    }
    if (!os) throw IoError("write_snapshots_binary: write failed");
}

std::vector<Snapshot> read_snapshots_binary(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "GWPSNAP1", 8) != 0) throw IoError("read_snapshots_binary: bad magic");
    const auto d = get<std::uint32_t>(is);
    if (d < 1 || d > kMaxDim) throw IoError("read_snapshots_binary: bad dimension");
    std::vector<int> n(d);
    for (auto& v : n) v = static_cast<int>(get<std::uint32_t>(is));
    Eigen::VectorXd c(d), h(d);
    for (std::uint32_t a = 0; a < d; ++a) c[a] = get<double>(is);
    for (std::uint32_t a = 0; a < d; ++a) h[a] = get<double>(is);
    const double eps = get<double>(is);
    const auto count = get<std::uint64_t>(is);
    Grid g(c, h, n);
    std::vector<Snapshot> out;
    for (std::uint64_t k = 0; k < count; ++k) {
        const double t = get<double>(is);
        ComplexVector v(static_cast<Eigen::Index>(g.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double re = get<double>(is);
            const double im = get<double>(is);
            v[i] = cplx(re, im);
        }
        out.push_back({t, WaveFunction(g, std::move(v), eps)});
    }
    return out;
}

void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snaps) {
    const int d = snaps.empty() ? 1 : snaps.front().psi.grid().dim();
    os << "t,index";
    for (int a = 0; a < d; ++a) os << ",x" << a + 1;
    os << ",re,im\n";
    char buf[32];
    auto put_num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& s : snaps) {
        for_each_point(s.psi.grid(), [&](std::size_t flat, const Eigen::VectorXd& x) {
            put_num(s.t);
            os << ',' << flat;
            for (int a = 0; a < d; ++a) os << ',', put_num(x[a]);
            os << ',', put_num(s.psi[flat].real());
            os << ',', put_num(s.psi[flat].imag());
            os << '\n';
        });
    }
}

} // namespace gwp
