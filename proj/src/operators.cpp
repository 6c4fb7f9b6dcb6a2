#include "gwp/operators.hpp"

#include <cmath>
#include <sstream>

#include "gwp/errors.hpp"
#include "gwp/potentials.hpp"
#include "gwp/spectral.hpp"

namespace gwp {

cplx inner_product(const WaveFunction& f, const WaveFunction& g) {
    require_compatible(f, g, "inner_product");
    return f.values().dot(g.values()) * f.grid().cell_volume();
}

double l2_norm(const WaveFunction& f) { return std::sqrt(f.values().squaredNorm() * f.grid().cell_volume()); }

WaveFunction apply_position(const WaveFunction& f, int axis, const Eigen::VectorXd& shift) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw ValidationError("apply_position: axis out of range");
    if (shift.size() != g.dim()) throw ValidationError("apply_position: shift has wrong dimension");
    ComplexVector out(f.values().size());
    for_each_point(g, [&](std::size_t flat, const Eigen::VectorXd& x) {
        const auto i = static_cast<Eigen::Index>(flat);
        out[i] = (x[axis] - shift[axis]) * f.values()[i];
    });
    return f.with_values(std::move(out));
}

WaveFunction apply_momentum(const WaveFunction& f, int axis, Diagnostics* diag) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw ValidationError("apply_momentum: axis out of range");
    auto sp = cached_spectral(g);
    ComplexVector c = f.values();
    sp->forward(c);
    if (diag) {
        const double tail = spectral_tail_fraction(f);
        if (tail > kResolutionWarningTail) {
            std::ostringstream os;
            os << "apply_momentum: spectral tail fraction " << tail << " on " << g.describe();
            diag->warnings.push_back(os.str());
        }
    }
    c.array() *= f.eps() * sp->derivative_symbol(axis).array().cast<cplx>();
    sp->backward(c);
    return f.with_values(std::move(c));
}

WaveFunction apply_kinetic(const WaveFunction& f) {
    auto sp = cached_spectral(f.grid());
    ComplexVector c = f.values();
    sp->forward(c);
    c.array() *= (0.5 * f.eps() * f.eps()) * sp->wavenumber_squared().array().cast<cplx>();
    sp->backward(c);
    return f.with_values(std::move(c));
}

WaveFunction apply_potential(const WaveFunction& f, const PotentialModel& pot) {
    if (pot.dim() != f.grid().dim()) throw ValidationError("apply_potential: dimension mismatch");
    ComplexVector out(f.values().size());
    for_each_point(f.grid(), [&](std::size_t flat, const Eigen::VectorXd& x) {
        const auto i = static_cast<Eigen::Index>(flat);
        out[i] = pot.value(x) * f.values()[i];
    });
    return f.with_values(std::move(out));
}

WaveFunction apply_hamiltonian(const WaveFunction& f, const PotentialModel& pot) {
    WaveFunction h = apply_kinetic(f);
    h += apply_potential(f, pot);
    return h;
}

double expectation(const Observable& obs, const WaveFunction& psi, const PotentialModel* pot) {
    const double norm = l2_norm(psi);
    if (std::abs(norm - 1.0) > kNormTolerance) {
        std::ostringstream os;
        os.precision(12);
        os << "expectation: state is not normalized (norm " << norm << ")";
        throw NormalizationError(os.str(), norm);
    }
    const int d = psi.grid().dim();
    auto check_axis = [d](int a) {
        if (a < 0 || a >= d) throw ValidationError("expectation: axis out of range");
    };
    cplx value;
    switch (obs.kind) {
    case Observable::Kind::position: {
        check_axis(obs.i);
        value = inner_product(psi, apply_position(psi, obs.i, Eigen::VectorXd::Zero(d)));
        break;
    }
    case Observable::Kind::momentum:
        check_axis(obs.i);
        value = inner_product(psi, apply_momentum(psi, obs.i));
        break;
    case Observable::Kind::energy:
        if (!pot) throw ValidationError("expectation: energy requires a potential");
        value = inner_product(psi, apply_hamiltonian(psi, *pot));
        break;
    case Observable::Kind::angular_momentum: {
        check_axis(obs.i);
        check_axis(obs.j);
        if (obs.i == obs.j) return 0.0;
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
        const WaveFunction xjpi = apply_position(apply_momentum(psi, obs.i), obs.j, zero);
        const WaveFunction pixj = apply_momentum(apply_position(psi, obs.j, zero), obs.i);
        const WaveFunction xipj = apply_position(apply_momentum(psi, obs.j), obs.i, zero);
        const WaveFunction pjxi = apply_momentum(apply_position(psi, obs.i, zero), obs.j);
        value = 0.5 * (inner_product(psi, xjpi) + inner_product(psi, pixj)) -
                0.5 * (inner_product(psi, xipj) + inner_product(psi, pjxi));
        break;
    }
    }
    if (std::abs(value.imag()) > kImaginaryResidueTolerance * std::max(1.0, std::abs(value.real()))) {
        std::ostringstream os;
        os << "expectation: imaginary residue " << value.imag() << " exceeds tolerance";
        throw NumericalError(os.str());
    }
    return value.real();
}

} // namespace gwp
