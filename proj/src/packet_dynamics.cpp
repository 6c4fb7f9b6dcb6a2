#include "gwp/packet_dynamics.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "gwp/errors.hpp"

namespace gwp {

namespace {

const cplx I(0.0, 1.0);

double max_abs_diff(const PacketParams& a, const PacketParams& b) {
    double m = std::abs(a.S - b.S);
    m = std::max(m, (a.q - b.q).cwiseAbs().maxCoeff());
    m = std::max(m, (a.p - b.p).cwiseAbs().maxCoeff());
    m = std::max(m, (a.Q - b.Q).cwiseAbs().maxCoeff());
    m = std::max(m, (a.P - b.P).cwiseAbs().maxCoeff());
    return m;
}

Eigen::VectorXd force(Flow flow, const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot,
                      double eps) {
    Eigen::VectorXd f = -pot.gradient(q);
    if (flow == Flow::corrected) f -= eps * grad_v1(q, Q, pot);
    return f;
}

} // namespace

DetBranch DetBranch::principal(const ComplexMatrix& Q) {
    const cplx det = Q.determinant();
    if (!(std::abs(det) > 0.0) || !std::isfinite(std::abs(det))) throw ValidationError("det branch: Q is singular");
    return DetBranch{std::arg(det), det};
}

DetBranch DetBranch::advanced(const ComplexMatrix& Q_new, double max_jump) const {
    const cplx det = Q_new.determinant();
    if (!(std::abs(det) > 0.0) || !std::isfinite(std::abs(det))) throw NumericalError("det branch: Q became singular");
    const double delta = std::arg(det / last_det);
    if (std::abs(delta) >= max_jump) {
        std::ostringstream os;
        os << "det branch: arg(det Q) jumped by " << delta << " in one step; refine the time step";
        throw StepSizeError(os.str());
    }
    return DetBranch{arg + delta, det};
}

int DetBranch::winding() const { return static_cast<int>(std::lround((arg - std::arg(last_det)) / (2.0 * M_PI))); }

cplx DetBranch::inverse_sqrt_det() const { return std::polar(1.0 / std::sqrt(std::abs(last_det)), -0.5 * arg); }

PacketParams PacketParams::make(Eigen::VectorXd q, Eigen::VectorXd p, ComplexMatrix Q, ComplexMatrix P, double S,
                                double eps) {
    const auto d = q.size();
    if (d < 1 || d > 3) throw ValidationError("packet: dimension must be in 1..3");
    if (p.size() != d || Q.rows() != d || Q.cols() != d || P.rows() != d || P.cols() != d)
        throw ValidationError("packet: inconsistent shapes of q, p, Q, P");
    if (!q.allFinite() || !p.allFinite() || !Q.allFinite() || !P.allFinite() || !std::isfinite(S))
        throw ValidationError("packet: non-finite parameters");
    if (!(eps > 0.0)) throw ValidationError("packet: eps must be positive");
    Eigen::JacobiSVD<ComplexMatrix> svd(Q);
    const auto& sv = svd.singularValues();
    if (!(sv[d - 1] > 0.0) || sv[0] / sv[d - 1] > 1e12) throw ValidationError("packet: Q is singular or ill-conditioned");
    auto [r1, r2] = check_symplectic_invariants(Q, P);
    const double scale = std::max(1.0, Q.norm() * P.norm());
    if (r1 > kSymplecticTolerance * scale || r2 > kSymplecticTolerance * scale) {
        std::ostringstream os;
        os << "packet: (Q, P) violates the symplectic relations (r1 = " << r1 << ", r2 = " << r2 << ")";
        throw ValidationError(os.str());
    }
    PacketParams s;
    s.q = std::move(q);
    s.p = std::move(p);
    s.Q = std::move(Q);
    s.P = std::move(P);
    s.S = S;
    s.eps = eps;
    s.branch = DetBranch::principal(s.Q);
    return s;
}

PacketParams PacketParams::standard(Eigen::VectorXd q, Eigen::VectorXd p, double eps) {
    const auto d = q.size();
    return make(std::move(q), std::move(p), ComplexMatrix::Identity(d, d), I * ComplexMatrix::Identity(d, d), 0.0,
                eps);
}

ComplexMatrix PacketParams::PQinv() const { return Q.transpose().partialPivLu().solve(P.transpose()).transpose(); }

std::string to_string(Flow f) { return f == Flow::classical ? "classical" : "corrected"; }

double v1_correction(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot) {
    const Eigen::MatrixXd qq = (Q * Q.adjoint()).real();
    return 0.25 * (qq.cwiseProduct(pot.hessian(q))).sum();
}

Eigen::VectorXd grad_v1(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot) {
    if (pot.is_quadratic()) return Eigen::VectorXd::Zero(q.size());
    const Eigen::MatrixXd qq = (Q * Q.adjoint()).real();
    return 0.25 * pot.eval(q, 3).contract_matrix(qq);
}

Tangent rhs_classical(const PacketParams& s, const PotentialModel& pot) {
    Tangent t;
    t.dq = s.p;
    t.dp = -pot.gradient(s.q);
    t.dQ = s.P;
    t.dP = -pot.hessian(s.q).cast<cplx>() * s.Q;
    t.dS = 0.5 * s.p.squaredNorm() - pot.value(s.q);
    return t;
}

Tangent rhs_corrected(const PacketParams& s, const PotentialModel& pot) {
    Tangent t = rhs_classical(s, pot);
    t.dp -= s.eps * grad_v1(s.q, s.Q, pot);
    return t;
}

Tangent rhs(Flow flow, const PacketParams& s, const PotentialModel& pot) {
    return flow == Flow::classical ? rhs_classical(s, pot) : rhs_corrected(s, pot);
}

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("integrator: dt must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("integrator: t_end must be positive");
    if (dt > t_end) throw ValidationError("integrator: dt exceeds t_end");
    if (!(refine_until > 0.0 && refine_until < 1.0)) throw ValidationError("integrator: refine_until must lie in (0, 1)");
    if (snapshots < 0) throw ValidationError("integrator: negative snapshot count");
    if (!(max_branch_step > 0.0 && max_branch_step <= M_PI)) throw ValidationError("integrator: bad max_branch_step");
}

namespace {

PacketParams advance(const PacketParams& s, const Tangent& t, double h) {
    PacketParams r = s;
    r.q += h * t.dq;
    r.p += h * t.dp;
    r.Q += h * t.dQ;
    r.P += h * t.dP;
    r.S += h * t.dS;
    return r;
}

} // namespace

PacketParams step(const PacketParams& s, Flow flow, const PotentialModel& pot, Scheme scheme, double dt,
                  double max_branch_step) {
    PacketParams r = s;
    if (scheme == Scheme::stormer_verlet) {
        const double h = 0.5 * dt;
        r.S -= h * pot.value(r.q);
        r.p += h * force(flow, r.q, r.Q, pot, r.eps);
        r.P -= h * (pot.hessian(r.q).cast<cplx>() * r.Q);

        r.S += dt * 0.5 * r.p.squaredNorm();
        r.q += dt * r.p;
        r.Q += dt * r.P;

        r.S -= h * pot.value(r.q);
        r.p += h * force(flow, r.q, r.Q, pot, r.eps);
        r.P -= h * (pot.hessian(r.q).cast<cplx>() * r.Q);
    } else {
        const Tangent k1 = rhs(flow, s, pot);
        const Tangent k2 = rhs(flow, advance(s, k1, 0.5 * dt), pot);
        const Tangent k3 = rhs(flow, advance(s, k2, 0.5 * dt), pot);
        const Tangent k4 = rhs(flow, advance(s, k3, dt), pot);
        const double w = dt / 6.0;
        r.q += w * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
        r.p += w * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
        r.Q += w * (k1.dQ + 2.0 * k2.dQ + 2.0 * k3.dQ + k4.dQ);
        r.P += w * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
        r.S += w * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
    }
    r.branch = s.branch.advanced(r.Q, max_branch_step);
    return r;
}

Trajectory integrate(const PacketParams& s0, Flow flow, const PotentialModel& pot, const IntegratorConfig& cfg) {
    cfg.validate();
    if (pot.dim() != s0.dim()) throw ValidationError("integrate: potential and packet dimensions differ");
    const int intervals = cfg.snapshots > 0 ? cfg.snapshots : static_cast<int>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    const double span = cfg.t_end / intervals;
    const int per = std::max(1, static_cast<int>(std::ceil(span / cfg.dt - 1e-9)));
    const double h = span / per;

    Trajectory traj;
    traj.dt = h;
    traj.times.reserve(static_cast<std::size_t>(intervals) + 1);
    traj.states.reserve(static_cast<std::size_t>(intervals) + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(s0);
    const auto [r1_0, r2_0] = check_symplectic_invariants(s0);

    PacketParams s = s0;
    for (int k = 1; k <= intervals; ++k) {
        for (int m = 0; m < per; ++m) s = step(s, flow, pot, cfg.scheme, h, cfg.max_branch_step);
        const auto [r1, r2] = check_symplectic_invariants(s);
        const double t = k == intervals ? cfg.t_end : k * span;
        if (std::abs(r1 - r1_0) > cfg.max_invariant_drift || std::abs(r2 - r2_0) > cfg.max_invariant_drift) {
            std::ostringstream os;
            os << "integrate: symplectic invariant drift (" << r1 << ", " << r2 << ") at t = " << t;
            throw NumericalError(os.str());
        }
        traj.times.push_back(t);
        traj.states.push_back(s);
    }
    return traj;
}

double step_halving_order(const PacketParams& s0, Flow flow, const PotentialModel& pot, IntegratorConfig cfg) {
    cfg.snapshots = 1;
    std::array<PacketParams, 3> ends;
    for (int i = 0; i < 3; ++i) {
        ends[i] = integrate(s0, flow, pot, cfg).states.back();
        cfg.dt *= 0.5;
    }
    const double d1 = max_abs_diff(ends[0], ends[1]);
    const double d2 = max_abs_diff(ends[1], ends[2]);
    return std::log2(d1 / d2);
}

double hamiltonian_classical(const PacketParams& s, const PotentialModel& pot) {
    return 0.5 * s.p.squaredNorm() + pot.value(s.q);
}

double hamiltonian_eps(const PacketParams& s, const PotentialModel& pot) {
    const double kinetic_width = (s.P.adjoint() * s.P).trace().real();
    const double potential_width = ((s.Q * s.Q.adjoint()).real().cwiseProduct(pot.hessian(s.q))).sum();
    return hamiltonian_classical(s, pot) + 0.25 * s.eps * (kinetic_width + potential_width);
}

Eigen::MatrixXd semiclassical_angular_momentum(const PacketParams& s) {
    const int d = s.dim();
    if (d < 2) throw ValidationError("angular momentum: unsupported dimension 1 (needs d >= 2)");
    Eigen::MatrixXd J = s.p * s.q.transpose() - s.q * s.p.transpose();
    J += 0.5 * s.eps * (s.P * s.Q.adjoint() - s.Q * s.P.adjoint()).real();
    return J;
}

std::pair<double, double> check_symplectic_invariants(const ComplexMatrix& Q, const ComplexMatrix& P) {
    const auto d = Q.rows();
    const double r1 = (Q.transpose() * P - P.transpose() * Q).norm();
    const double r2 = (Q.adjoint() * P - P.adjoint() * Q - 2.0 * I * ComplexMatrix::Identity(d, d)).norm();
    return {r1, r2};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const PotentialModel& pot) {
    if (traj.states.empty()) {
        os << "t\n";
        return;
    }
    const int d = traj.states.front().dim();
    os << "t";
    for (int i = 0; i < d; ++i) os << ",q" << i + 1;
    for (int i = 0; i < d; ++i) os << ",p" << i + 1;
    for (const char* m : {"Q", "P"})
        for (const char* part : {"re", "im"})
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) os << "," << m << "_" << part << "_" << i + 1 << j + 1;
    os << ",S,H_eps,H_classical,r1,r2\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& s = traj.states[k];
        put(traj.times[k]);
        for (int i = 0; i < d; ++i) os << ",", put(s.q[i]);
        for (int i = 0; i < d; ++i) os << ",", put(s.p[i]);
        for (const ComplexMatrix* m : {&s.Q, &s.P}) {
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) os << ",", put((*m)(i, j).real());
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) os << ",", put((*m)(i, j).imag());
        }
        auto [r1, r2] = check_symplectic_invariants(s);
        os << ",", put(s.S);
        os << ",", put(hamiltonian_eps(s, pot));
        os << ",", put(hamiltonian_classical(s, pot));
        os << ",", put(r1);
        os << ",", put(r2);
        os << "\n";
    }
}

} // namespace gwp
