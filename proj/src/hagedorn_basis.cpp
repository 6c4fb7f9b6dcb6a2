#include "gwp/hagedorn_basis.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "gwp/errors.hpp"
#include "gwp/spectral.hpp"

namespace gwp {

namespace {

const cplx I(0.0, 1.0);

// (x_k - q_k) f and (p_k - p) f for every axis k.
struct Shifted {
    std::vector<WaveFunction> x;
    std::vector<WaveFunction> p;
};

Shifted shifted(const PacketParams& params, const WaveFunction& f, Diagnostics* diag) {
    const int d = params.dim();
    if (f.grid().dim() != d) throw ValidationError("ladder operator: dimension mismatch");
    Shifted s;
    for (int k = 0; k < d; ++k) {
        s.x.push_back(apply_position(f, k, params.q));
        WaveFunction pk = apply_momentum(f, k, diag);
        pk.values() -= params.p[k] * f.values();
        s.p.push_back(std::move(pk));
    }
    return s;
}

WaveFunction combine(const Shifted& s, const ComplexVector& a, const ComplexVector& b, cplx prefactor) {
    WaveFunction out = s.x[0].with_values(ComplexVector::Zero(s.x[0].values().size()));
    for (std::size_t k = 0; k < s.x.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        out.values() += a[kk] * s.x[k].values() - b[kk] * s.p[k].values();
    }
    out *= prefactor;
    return out;
}

} // namespace

WaveFunction eval_phi0_unchecked(const PacketParams& params, const Grid& grid) {
    const int d = params.dim();
    if (grid.dim() != d) throw ValidationError("eval_phi0: grid and packet dimensions differ");
    const ComplexMatrix B = params.PQinv();
    const double eps = params.eps;
    const cplx c = std::pow(M_PI * eps, -0.25 * d) * params.branch.inverse_sqrt_det();
    ComplexVector v(static_cast<Eigen::Index>(grid.size()));
    Eigen::VectorXd y(d);
    for_each_point(grid, [&](std::size_t flat, const Eigen::VectorXd& x) {
        y = x - params.q;
        const cplx theta = 0.5 * y.cast<cplx>().dot(B * y.cast<cplx>()) + params.p.dot(y) + params.S;
        v[static_cast<Eigen::Index>(flat)] = c * std::exp(I * theta / eps);
    });
    return WaveFunction(grid, std::move(v), eps);
}

Grid grid_for_packet(const PacketParams& params, int max_order, GridSizing rule) {
    PacketExtent e;
    e.q_min = params.q;
    e.q_max = params.q;
    e.max_abs_p = params.p.cwiseAbs().maxCoeff();
    e.max_q_sv = Eigen::JacobiSVD<ComplexMatrix>(params.Q).singularValues()[0];
    e.max_p_norm = Eigen::JacobiSVD<ComplexMatrix>(params.P).singularValues()[0];
    rule.max_order = std::max(rule.max_order, max_order);
    return size_grid(e, params.eps, rule);
}

WaveFunction eval_phi0(const PacketParams& params, const Grid& grid) {
    WaveFunction phi = eval_phi0_unchecked(params, grid);
    const double norm = l2_norm(phi);
    const double tail = spectral_tail_fraction(phi);
    const double edge = boundary_mass_fraction(phi);
    if (std::abs(norm - 1.0) > kResolutionErrorThreshold || tail > kResolutionErrorThreshold ||
        edge > kResolutionErrorThreshold) {
        std::ostringstream os;
        os << "eval_phi0: packet not resolved on " << grid.describe() << " (norm " << norm << ", spectral tail "
           << tail << ", boundary mass " << edge << ")";
        throw ResolutionError(os.str());
    }
    return phi;
}

WaveFunction apply_lowering(const PacketParams& params, const WaveFunction& f, int j, Diagnostics* diag) {
    if (j < 0 || j >= params.dim()) throw ValidationError("apply_lowering: component out of range");
    const Shifted s = shifted(params, f, diag);
    return combine(s, params.P.col(j), params.Q.col(j), -I / std::sqrt(2.0 * params.eps));
}

WaveFunction apply_raising(const PacketParams& params, const WaveFunction& f, int j, Diagnostics* diag) {
    if (j < 0 || j >= params.dim()) throw ValidationError("apply_raising: component out of range");
    const Shifted s = shifted(params, f, diag);
    return combine(s, params.P.col(j).conjugate(), params.Q.col(j).conjugate(), I / std::sqrt(2.0 * params.eps));
}

std::vector<WaveFunction> apply_lowering(const PacketParams& params, const WaveFunction& f, Diagnostics* diag) {
    const Shifted s = shifted(params, f, diag);
    std::vector<WaveFunction> out;
    for (int j = 0; j < params.dim(); ++j)
        out.push_back(combine(s, params.P.col(j), params.Q.col(j), -I / std::sqrt(2.0 * params.eps)));
    return out;
}

std::vector<WaveFunction> apply_raising(const PacketParams& params, const WaveFunction& f, Diagnostics* diag) {
    const Shifted s = shifted(params, f, diag);
    std::vector<WaveFunction> out;
    for (int j = 0; j < params.dim(); ++j)
        out.push_back(combine(s, params.P.col(j).conjugate(), params.Q.col(j).conjugate(),
                              I / std::sqrt(2.0 * params.eps)));
    return out;
}

BasisSet::BasisSet(PacketParams params, Grid grid, int max_order)
    : params_(std::move(params)), grid_(std::move(grid)), max_order_(max_order) {
    if (max_order < 0) throw ValidationError("basis: max order must be >= 0");
    if (grid_.dim() != params_.dim()) throw ValidationError("basis: grid and packet dimensions differ");
}

const WaveFunction& BasisSet::operator[](const MultiIndex& n) const {
    auto it = functions_.find(n);
    if (it == functions_.end()) throw std::out_of_range("basis: missing index " + n.str());
    return it->second;
}

void BasisSet::insert(const MultiIndex& n, WaveFunction f) {
    if (n.dim() != params_.dim()) throw ValidationError("basis: index dimension mismatch");
    if (f.grid() != grid_ || f.eps() != params_.eps)
        throw GridMismatchError("basis: function for " + n.str() + " is not on the basis grid");
    functions_.insert_or_assign(n, std::move(f));
}

std::vector<MultiIndex> BasisSet::indices() const {
    std::vector<MultiIndex> out;
    for (const auto& n : indices_up_to(params_.dim(), max_order_))
        if (contains(n)) out.push_back(n);
    for (const auto& [n, f] : functions_)
        if (n.order() > max_order_) out.push_back(n);
    return out;
}

double BasisSet::gram_deviation() const {
    const auto idx = indices();
    double worst = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a; b < idx.size(); ++b) {
            const cplx g = inner_product((*this)[idx[a]], (*this)[idx[b]]);
            worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

WaveFunction BasisSet::raised(const MultiIndex& n, int j) const {
    if (!contains(n)) throw ValidationError("basis: cannot raise missing index " + n.str());
    WaveFunction f = apply_raising(params_, (*this)[n], j);
    f *= 1.0 / std::sqrt(n[j] + 1.0);
    return f;
}

const WaveFunction& BasisSet::raise_index(const MultiIndex& n, int j) {
    const MultiIndex m = n.raised(j);
    insert(m, raised(n, j));
    return functions_.at(m);
}

namespace {

int first_nonzero(const MultiIndex& m) {
    for (int j = 0; j < m.dim(); ++j)
        if (m[j] > 0) return j;
    return -1;
}

} // namespace

BasisSet build_basis(const PacketParams& params, int max_order, const Grid& grid) {
    BasisSet basis(params, grid, max_order);
    basis.insert(MultiIndex(params.dim()), eval_phi0(params, grid));
    for (const auto& m : indices_up_to(params.dim(), max_order)) {
        const int j = first_nonzero(m);
        if (j < 0) continue;
        basis.raise_index(m.lowered(j), j);
    }
    return basis;
}

BasisSet ladder_recurrence_eval(const PacketParams& params, int max_order, const Grid& grid) {
    const int d = params.dim();
    BasisSet basis(params, grid, max_order);
    basis.insert(MultiIndex(d), eval_phi0(params, grid));
    const ComplexMatrix Qinv = params.Q.inverse();
    const ComplexMatrix Qbar = params.Q.conjugate();
    const double scale = std::sqrt(2.0 / params.eps);
    const auto npts = static_cast<Eigen::Index>(grid.size());

    for (const auto& m : indices_up_to(d, max_order)) {
        const int j = first_nonzero(m);
        if (j < 0) continue;
        const MultiIndex n = m.lowered(j);
        const ComplexVector& phin = basis[n].values();
        // r_k = sqrt(2/eps)(x_k - q_k) phi_n - sum_l conj(Q)_kl sqrt(n_l) phi_{n - e_l}
        std::vector<ComplexVector> r(d, ComplexVector(npts));
        for_each_point(grid, [&](std::size_t flat, const Eigen::VectorXd& x) {
            const auto i = static_cast<Eigen::Index>(flat);
            for (int k = 0; k < d; ++k) r[k][i] = scale * (x[k] - params.q[k]) * phin[i];
        });
        for (int l = 0; l < d; ++l) {
            if (n[l] == 0) continue;
            const ComplexVector& lower = basis[n.lowered(l)].values();
            const double w = std::sqrt(static_cast<double>(n[l]));
            for (int k = 0; k < d; ++k) r[k] -= (Qbar(k, l) * w) * lower;
        }
        ComplexVector out = ComplexVector::Zero(npts);
        for (int k = 0; k < d; ++k) out += Qinv(j, k) * r[k];
        out /= std::sqrt(static_cast<double>(m[j]));
        basis.insert(m, WaveFunction(grid, std::move(out), params.eps));
    }
    return basis;
}

double max_basis_difference(const BasisSet& a, const BasisSet& b) {
    double worst = 0.0;
    for (const auto& n : a.indices()) {
        if (!b.contains(n)) continue;
        require_compatible(a[n], b[n], "max_basis_difference");
        worst = std::max(worst, (a[n].values() - b[n].values()).cwiseAbs().maxCoeff());
    }
    return worst;
}

void write_basis_csv(std::ostream& os, const BasisSet& basis) {
    const Grid& g = basis.grid();
    os << "n";
    for (int a = 0; a < g.dim(); ++a) os << ",x" << a + 1;
    os << ",re,im\n";
    char buf[32];
    for (const auto& n : basis.indices()) {
        const WaveFunction& f = basis[n];
        for_each_point(g, [&](std::size_t flat, const Eigen::VectorXd& x) {
            os << '"' << n.str() << '"';
            for (int a = 0; a < g.dim(); ++a) {
                std::snprintf(buf, sizeof buf, "%.17g", x[a]);
                os << ',' << buf;
            }
            std::snprintf(buf, sizeof buf, "%.17g", f[flat].real());
            os << ',' << buf;
            std::snprintf(buf, sizeof buf, "%.17g", f[flat].imag());
            os << ',' << buf << '\n';
        });
    }
}

} // namespace gwp
