#include "gwp/residuals.hpp"

#include <cmath>
#include <sstream>

#include "gwp/errors.hpp"
#include "gwp/spectral.hpp"

namespace gwp {

namespace {

const cplx I(0.0, 1.0);

double safe_ratio(double num, double den) { return den > 1e-300 ? num / den : num; }

} // namespace

ResidualKernel::ResidualKernel(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot, double eps)
    : q_(q), pot_(&pot), eps_(eps), v0_(pot.value(q)), dv_(pot.gradient(q)), d2v_(pot.hessian(q)),
      d3v_(pot.eval(q, 3)), grad_v1_(gwp::grad_v1(q, Q, pot)) {
    if (!(eps > 0.0)) throw ValidationError("residual kernel: eps must be positive");
    if (q.size() != pot.dim() || Q.rows() != pot.dim()) throw ValidationError("residual kernel: dimension mismatch");
}

AlphaParts ResidualKernel::alpha(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd y = x - q_;
    const double vx = pot_->value(x);
    const double taylor2 = v0_ + dv_.dot(y) + 0.5 * y.dot(d2v_ * y);
    const double cubic = d3v_.contract(y);
    const double se = std::sqrt(eps_);
    AlphaParts a;
    a.part0 = grad_v1_.dot(y) / se - cubic / (6.0 * eps_ * se);
    a.part1 = (taylor2 + cubic / 6.0 - vx) / (eps_ * eps_);
    a.full = grad_v1_.dot(y) / se + (taylor2 - vx) / (eps_ * se);
    return a;
}

double ResidualKernel::alpha_hagedorn(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd y = x - q_;
    const double taylor2 = v0_ + dv_.dot(y) + 0.5 * y.dot(d2v_ * y);
    return (taylor2 - pot_->value(x)) / (eps_ * std::sqrt(eps_));
}

double ResidualKernel::multiplier(const Eigen::VectorXd& x, Flow flow) const {
    return flow == Flow::corrected ? alpha(x).full : alpha_hagedorn(x);
}

Eigen::VectorXd ResidualKernel::multiplier_gradient(const Eigen::VectorXd& x, Flow flow) const {
    const Eigen::VectorXd y = x - q_;
    const double se = std::sqrt(eps_);
    Eigen::VectorXd g = (dv_ + d2v_ * y - pot_->gradient(x)) / (eps_ * se);
    if (flow == Flow::corrected) g += grad_v1_ / se;
    return g;
}

BetaParts ResidualKernel::beta(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd y = x - q_;
    const Eigen::VectorXd gx = pot_->gradient(x);
    const Eigen::VectorXd quad = d3v_.contract_to_vector(y);
    const double se = std::sqrt(eps_);
    BetaParts b;
    b.part0 = -I * (grad_v1_ - 0.5 * quad / eps_).cast<cplx>();
    b.part1 = -I * ((dv_ + d2v_ * y + 0.5 * quad - gx) / (eps_ * se)).cast<cplx>();
    b.full = -I * (grad_v1_ + (dv_ + d2v_ * y - gx) / eps_).cast<cplx>();
    return b;
}

AlphaParts alpha(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot,
                 const Eigen::VectorXd& x, double eps) {
    return ResidualKernel(q, Q, pot, eps).alpha(x);
}

double alpha_hagedorn(const Eigen::VectorXd& q, const PotentialModel& pot, const Eigen::VectorXd& x, double eps) {
    const auto d = q.size();
    return ResidualKernel(q, ComplexMatrix::Identity(d, d), pot, eps).alpha_hagedorn(x);
}

BetaParts beta(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot,
               const Eigen::VectorXd& x, double eps) {
    return ResidualKernel(q, Q, pot, eps).beta(x);
}

ResidualField zeta(const PacketParams& params, const PotentialModel& pot, const WaveFunction& phi_n, Flow flow,
                   ResidualComponent component) {
    if (flow == Flow::classical && component != ResidualComponent::full)
        throw ValidationError("zeta: the classical-flow residual has no alpha0/alpha1 split");
    if (phi_n.eps() != params.eps) throw ValidationError("zeta: eps of phi_n differs from the packet");
    const ResidualKernel kernel(params.q, params.Q, pot, params.eps);
    ComplexVector v(phi_n.values().size());
    for_each_point(phi_n.grid(), [&](std::size_t flat, const Eigen::VectorXd& x) {
        double m = 0.0;
        if (flow == Flow::classical) {
            m = kernel.alpha_hagedorn(x);
        } else {
            const AlphaParts a = kernel.alpha(x);
            m = component == ResidualComponent::full ? a.full
                : component == ResidualComponent::alpha0_part ? a.part0
                                                               : a.part1;
        }
        const auto i = static_cast<Eigen::Index>(flat);
        v[i] = m * phi_n.values()[i];
    });
    return ResidualField{phi_n.with_values(std::move(v)), component, params.eps};
}

ResidualField zeta(const PacketParams& params, const PotentialModel& pot, const MultiIndex& n, const Grid& grid,
                   Flow flow, ResidualComponent component) {
    const BasisSet basis = ladder_recurrence_eval(params, n.order(), grid);
    return zeta(params, pot, basis[n], flow, component);
}

ZetaNorms zeta_norms(const PacketParams& params, const PotentialModel& pot, const Grid& grid) {
    const WaveFunction phi0 = eval_phi0(params, grid);
    const WaveFunction z = zeta(params, pot, phi0).base;
    const double se = std::sqrt(params.eps);
    ZetaNorms out;
    out.zeta = l2_norm(z);
    for (int i = 0; i < params.dim(); ++i) {
        out.xi_zeta = std::max(out.xi_zeta, l2_norm(apply_position(z, i, params.q)) / se);
        WaveFunction eta = apply_momentum(z, i);
        eta.values() -= params.p[i] * z.values();
        out.eta_zeta = std::max(out.eta_zeta, l2_norm(eta) / se);
    }
    return out;
}

double beta_spectral_discrepancy(const PacketParams& params, const PotentialModel& pot, const Grid& grid) {
    const WaveFunction phi0 = eval_phi0(params, grid);
    const WaveFunction z = zeta(params, pot, phi0).base;
    const ResidualKernel kernel(params.q, params.Q, pot, params.eps);
    const double se = std::sqrt(params.eps);
    double worst = 0.0;
    for (int i = 0; i < params.dim(); ++i) {
        WaveFunction lhs = apply_momentum(z, i);
        const WaveFunction pphi = apply_momentum(phi0, i);
        ComplexVector expected(phi0.values().size());
        for_each_point(grid, [&](std::size_t flat, const Eigen::VectorXd& x) {
            const auto k = static_cast<Eigen::Index>(flat);
            lhs.values()[k] -= kernel.alpha(x).full * pphi.values()[k];
            expected[k] = se * kernel.beta(x).full[i] * phi0.values()[k];
        });
        const WaveFunction ref = phi0.with_values(expected);
        worst = std::max(worst, safe_ratio(l2_norm(lhs - ref), l2_norm(ref)));
    }
    return worst;
}

double eta_zeta_identity_residual(const PacketParams& params, const PotentialModel& pot, const Grid& grid) {
    const int d = params.dim();
    const WaveFunction phi0 = eval_phi0(params, grid);
    const WaveFunction z = zeta(params, pot, phi0).base;
    const ResidualKernel kernel(params.q, params.Q, pot, params.eps);
    const ComplexMatrix B = params.PQinv();
    const double se = std::sqrt(params.eps);
    std::vector<WaveFunction> xi_z;
    for (int j = 0; j < d; ++j) {
        WaveFunction w = apply_position(z, j, params.q);
        w *= 1.0 / se;
        xi_z.push_back(std::move(w));
    }
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
        WaveFunction r = apply_momentum(z, i);
        r.values() -= params.p[i] * z.values();
        r *= 1.0 / se;
        for_each_point(grid, [&](std::size_t flat, const Eigen::VectorXd& x) {
            const auto k = static_cast<Eigen::Index>(flat);
            r.values()[k] -= kernel.beta(x).full[i] * phi0.values()[k];
        });
        for (int j = 0; j < d; ++j) r.values() -= B(i, j) * xi_z[j].values();
        worst = std::max(worst, l2_norm(r));
    }
    return worst;
}

double ThirdStateCoefficients::max_abs() const {
    double m = 0.0;
    for (const auto& [n, c] : coefficients) m = std::max(m, std::abs(c));
    return m;
}

ThirdStateCoefficients third_state_coefficients(const Eigen::VectorXd& q, const ComplexMatrix& Q,
                                                const PotentialModel& pot) {
    const int d = static_cast<int>(q.size());
    const DerivativeTensor T = pot.eval(q, 3);
    ThirdStateCoefficients out;
    for (const auto& n : indices_of_order(d, 3)) {
        // One ordered representative (l, m, r) of the multi-index n.
        std::array<int, 3> lmr{};
        int pos = 0;
        for (int a = 0; a < d; ++a)
            for (int c = 0; c < n[a]; ++c) lmr[pos++] = a;
        cplx w = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    const double t = T.at({i, j, k});
                    if (t != 0.0) w += t * Q(i, lmr[0]) * Q(j, lmr[1]) * Q(k, lmr[2]);
                }
        out.coefficients[n] = -w / (2.0 * std::sqrt(2.0) * std::sqrt(n.factorial()));
    }
    return out;
}

std::map<MultiIndex, cplx> orthogonality_projections(const PacketParams& params, const PotentialModel& pot,
                                                     const Grid& grid) {
    const BasisSet basis = ladder_recurrence_eval(params, 2, grid);
    const WaveFunction f =
        zeta(params, pot, basis[MultiIndex(params.dim())], Flow::corrected, ResidualComponent::alpha0_part).base;
    std::map<MultiIndex, cplx> out;
    for (const auto& k : basis.indices()) out[k] = inner_product(f, basis[k]);
    return out;
}

double orthogonality_defect(const PacketParams& params, const PotentialModel& pot, const Grid& grid) {
    const WaveFunction phi0 = eval_phi0(params, grid);
    const double scale =
        l2_norm(zeta(params, pot, phi0, Flow::corrected, ResidualComponent::alpha0_part).base);
    double worst = 0.0;
    for (const auto& [k, c] : orthogonality_projections(params, pot, grid)) worst = std::max(worst, std::abs(c));
    return safe_ratio(worst, scale > 1e-14 ? scale : 0.0);
}

double third_state_reconstruction_error(const PacketParams& params, const PotentialModel& pot, const Grid& grid) {
    const BasisSet basis = ladder_recurrence_eval(params, 3, grid);
    const WaveFunction f =
        zeta(params, pot, basis[MultiIndex(params.dim())], Flow::corrected, ResidualComponent::alpha0_part).base;
    WaveFunction sum = f.with_values(ComplexVector::Zero(f.values().size()));
    for (const auto& [n, c] : third_state_coefficients(params.q, params.Q, pot).coefficients)
        sum.values() += c * basis[n].values();
    const double scale = l2_norm(f);
    return safe_ratio(l2_norm(f - sum), scale > 1e-14 ? scale : 0.0);
}

ComplexVector hagedorn_first_excited_projection(const PacketParams& params, const PotentialModel& pot,
                                                const Grid& grid) {
    const int d = params.dim();
    const BasisSet basis = ladder_recurrence_eval(params, 1, grid);
    const WaveFunction z = zeta(params, pot, basis[MultiIndex(d)], Flow::classical).base;
    ComplexVector out(d);
    for (int j = 0; j < d; ++j) out[j] = inner_product(z, basis[MultiIndex::unit(d, j)]);
    return out;
}

ComplexVector hagedorn_projection_limit(const PacketParams& params, const PotentialModel& pot) {
    const Eigen::VectorXd g = grad_v1(params.q, params.Q, pot);
    return -(params.Q.adjoint() * g.cast<cplx>()) / std::sqrt(2.0);
}

namespace {

// d/dt A^*_j applied to f, from the parameter velocities.
WaveFunction raising_rate(const PacketParams& s, const Tangent& t, const WaveFunction& f, int j) {
    const int d = s.dim();
    WaveFunction out = f.with_values(ComplexVector::Zero(f.values().size()));
    for (int k = 0; k < d; ++k) {
        const WaveFunction xk = apply_position(f, k, s.q);
        WaveFunction pk = apply_momentum(f, k);
        pk.values() -= s.p[k] * f.values();
        out.values() += std::conj(t.dP(k, j)) * xk.values() - std::conj(t.dQ(k, j)) * pk.values();
        out.values() += (-std::conj(s.P(k, j)) * t.dq[k] + std::conj(s.Q(k, j)) * t.dp[k]) * f.values();
    }
    out *= I / std::sqrt(2.0 * s.eps);
    return out;
}

} // namespace

BasisSet phi_time_derivatives(const PacketParams& params, Flow flow, const PotentialModel& pot, int max_order,
                              const Grid& grid) {
    const int d = params.dim();
    const double eps = params.eps;
    const Tangent t = rhs(flow, params, pot);
    const BasisSet basis = ladder_recurrence_eval(params, max_order, grid);
    const ComplexMatrix Qinv = params.Q.inverse();
    const ComplexMatrix B = params.PQinv();
    const ComplexMatrix Bdot = t.dP * Qinv - B * t.dQ * Qinv;
    const cplx det_rate = -0.5 * (Qinv * t.dQ).trace();
    const Eigen::VectorXcd qdot = t.dq.cast<cplx>();

    const WaveFunction& phi0 = basis[MultiIndex(d)];
    ComplexVector v(phi0.values().size());
    for_each_point(grid, [&](std::size_t flat, const Eigen::VectorXd& x) {
        const Eigen::VectorXcd y = (x - params.q).cast<cplx>();
        const cplx theta_dot = -qdot.dot(B * y) + 0.5 * y.dot(Bdot * y) + t.dp.dot((x - params.q)) -
                               params.p.dot(t.dq) + t.dS;
        const auto i = static_cast<Eigen::Index>(flat);
        v[i] = phi0.values()[i] * (det_rate + I * theta_dot / eps);
    });

    BasisSet out(params, grid, max_order);
    out.insert(MultiIndex(d), phi0.with_values(std::move(v)));
    for (const auto& m : indices_up_to(d, max_order)) {
        int j = -1;
        for (int a = 0; a < d; ++a)
            if (m[a] > 0) {
                j = a;
                break;
            }
        if (j < 0) continue;
        const MultiIndex n = m.lowered(j);
        WaveFunction dm = raising_rate(params, t, basis[n], j);
        dm += apply_raising(params, out[n], j);
        dm *= 1.0 / std::sqrt(static_cast<double>(m[j]));
        out.insert(m, std::move(dm));
    }
    return out;
}

namespace {

double schrodinger_residual_from(const PacketParams& params, Flow flow, const PotentialModel& pot,
                                 const MultiIndex& n, const BasisSet& basis, const BasisSet& rates) {
    const double eps = params.eps;
    const WaveFunction& phi = basis[n];
    const WaveFunction h = apply_hamiltonian(phi, pot);
    const WaveFunction z = zeta(params, pot, phi, flow).base;
    WaveFunction r = rates[n];
    r *= I * eps;
    r -= h;
    r.values() -= (eps * std::sqrt(eps)) * z.values();
    return safe_ratio(l2_norm(r), l2_norm(h));
}

} // namespace

double schrodinger_residual(const PacketParams& params, Flow flow, const PotentialModel& pot, int max_order,
                            const Grid& grid) {
    const BasisSet basis = ladder_recurrence_eval(params, max_order, grid);
    const BasisSet rates = phi_time_derivatives(params, flow, pot, max_order, grid);
    double worst = 0.0;
    for (const auto& n : basis.indices())
        worst = std::max(worst, schrodinger_residual_from(params, flow, pot, n, basis, rates));
    return worst;
}

double schrodinger_residual(const PacketParams& params, Flow flow, const PotentialModel& pot, const MultiIndex& n,
                            const Grid& grid) {
    const BasisSet basis = ladder_recurrence_eval(params, n.order(), grid);
    const BasisSet rates = phi_time_derivatives(params, flow, pot, n.order(), grid);
    return schrodinger_residual_from(params, flow, pot, n, basis, rates);
}

double raising_evolution_residual(const PacketParams& params, Flow flow, const PotentialModel& pot,
                                  const WaveFunction& f) {
    const int d = params.dim();
    const double eps = params.eps;
    const Tangent t = rhs(flow, params, pot);
    const ResidualKernel kernel(params.q, params.Q, pot, eps);
    const ComplexMatrix Qadj = params.Q.adjoint();
    const WaveFunction hf = apply_hamiltonian(f, pot);
    double worst = 0.0, scale = 0.0;
    for (int j = 0; j < d; ++j) {
        WaveFunction lhs = raising_rate(params, t, f, j);
        lhs *= I * eps;
        scale = std::max(scale, l2_norm(lhs));
        lhs += apply_raising(params, hf, j);
        lhs -= apply_hamiltonian(apply_raising(params, f, j), pot);
        for_each_point(f.grid(), [&](std::size_t flat, const Eigen::VectorXd& x) {
            const Eigen::VectorXcd g = kernel.multiplier_gradient(x, flow).cast<cplx>();
            const cplx c = (eps * eps / std::sqrt(2.0)) * (Qadj.row(j) * g).value();
            const auto k = static_cast<Eigen::Index>(flat);
            lhs.values()[k] -= c * f.values()[k];
        });
        worst = std::max(worst, l2_norm(lhs));
    }
    return safe_ratio(worst, scale);
}

std::vector<double> wavefunction_error(const Trajectory& traj, const PotentialModel&,
                                       const std::vector<Snapshot>& reference, const MultiIndex& n) {
    if (traj.states.size() != reference.size())
        throw GridMismatchError("wavefunction_error: trajectory has " + std::to_string(traj.states.size()) +
                                " samples, reference has " + std::to_string(reference.size()));
    std::vector<double> out;
    out.reserve(reference.size());
    for (std::size_t k = 0; k < reference.size(); ++k) {
        if (std::abs(reference[k].t - traj.times[k]) > 1e-12 * std::max(1.0, std::abs(traj.times[k]))) {
            std::ostringstream os;
            os << "wavefunction_error: time mismatch at sample " << k << " (" << reference[k].t << " vs "
               << traj.times[k] << ")";
            throw GridMismatchError(os.str());
        }
        const WaveFunction& psi = reference[k].psi;
        if (n.order() == 0) {
            out.push_back(l2_norm(psi - eval_phi0_unchecked(traj.states[k], psi.grid())));
        } else {
            const BasisSet b = ladder_recurrence_eval(traj.states[k], n.order(), psi.grid());
            out.push_back(l2_norm(psi - b[n]));
        }
    }
    return out;
}

MagicFormulaCheck magic_formula_check(const PacketParams& params, Flow flow, const PotentialModel& pot,
                                      const MultiIndex& n, double h, const Grid& grid, int substeps) {
    if (!(h > 0.0) || substeps < 1) throw ValidationError("magic_formula_check: need h > 0 and substeps >= 1");
    const double eps = params.eps;
    IntegratorConfig ic;
    ic.t_end = h;
    ic.snapshots = substeps;
    ic.dt = h / (8.0 * substeps);
    const Trajectory traj = integrate(params, flow, pot, ic);

    const int strang_per_interval = 8;
    const StrangPropagator prop(grid, pot, h / (substeps * strang_per_interval), eps);
    auto evolve = [&](ComplexVector& v) {
        for (int s = 0; s < strang_per_interval; ++s) prop.step(v);
    };

    std::vector<WaveFunction> phis;
    for (const auto& s : traj.states) phis.push_back(ladder_recurrence_eval(s, n.order(), grid)[n]);

    ComplexVector psi = phis.front().values();
    ComplexVector acc = ComplexVector::Zero(psi.size());
    const double w = h / substeps;
    for (int m = 0; m <= substeps; ++m) {
        const double weight = (m == 0 || m == substeps) ? 0.5 * w : w;
        acc += weight * zeta(traj.states[m], pot, phis[m], flow).base.values();
        if (m < substeps) {
            evolve(acc);
            evolve(psi);
        }
    }
    acc *= I * std::sqrt(eps);
    const WaveFunction Z = phis.back().with_values(psi - phis.back().values());
    MagicFormulaCheck out;
    out.z_norm = l2_norm(Z);
    out.discrepancy = l2_norm(Z - Z.with_values(acc));
    return out;
}

} // namespace gwp
