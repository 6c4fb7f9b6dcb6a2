#pragma once

#include <string>
#include <vector>

#include "gwp/wave_function.hpp"

namespace gwp {

class PotentialModel;

/// Collects non-fatal numerical warnings from operator applications.
struct Diagnostics {
    std::vector<std::string> warnings;
};

inline constexpr double kResolutionWarningTail = 1e-8;

/// <f, g> = sum conj(f) g dV, right-linear.
cplx inner_product(const WaveFunction& f, const WaveFunction& g);
double l2_norm(const WaveFunction& f);

/// (x_axis - shift_axis) f
WaveFunction apply_position(const WaveFunction& f, int axis, const Eigen::VectorXd& shift);
/// -i eps d/dx_axis f, spectrally.
WaveFunction apply_momentum(const WaveFunction& f, int axis, Diagnostics* diag = nullptr);
/// p^2/2 f = -(eps^2/2) Laplacian f, spectrally.
WaveFunction apply_kinetic(const WaveFunction& f);
/// (p^2/2 + V) f
WaveFunction apply_hamiltonian(const WaveFunction& f, const PotentialModel& pot);
/// V(x) f
WaveFunction apply_potential(const WaveFunction& f, const PotentialModel& pot);

struct Observable {
    enum class Kind { position, momentum, energy, angular_momentum };
    Kind kind;
    int i = 0;
    int j = 0;

    static Observable position(int axis) { return {Kind::position, axis, 0}; }
    static Observable momentum(int axis) { return {Kind::momentum, axis, 0}; }
    static Observable energy() { return {Kind::energy, 0, 0}; }
    /// J_ij = x_j p_i - x_i p_j, symmetrized.
    static Observable angular_momentum(int i, int j) { return {Kind::angular_momentum, i, j}; }
};

inline constexpr double kNormTolerance = 1e-8;
inline constexpr double kImaginaryResidueTolerance = 1e-9;

/// <psi, O psi> for a normalized psi. pot may be null unless O is the energy.
double expectation(const Observable& obs, const WaveFunction& psi, const PotentialModel* pot = nullptr);

} // namespace gwp
