#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gwp/potentials.hpp"
#include "gwp/wave_function.hpp"

namespace gwp {

inline constexpr double kSymplecticTolerance = 1e-10;

/// Continuous argument of det Q, so that (det Q)^{-1/2} has no branch jumps.
struct DetBranch {
    double arg = 0.0;   // accumulated arg(det Q)
    cplx last_det{1.0, 0.0};

    static DetBranch principal(const ComplexMatrix& Q);
    /// Advance to the new det; throws StepSizeError when |delta arg| >= max_jump.
    DetBranch advanced(const ComplexMatrix& Q_new, double max_jump) const;
    int winding() const;
    /// (det Q)^{-1/2} on this branch.
    cplx inverse_sqrt_det() const;
};

/// Gaussian parameters (q, p, Q, P, S) with the semiclassical parameter.
struct PacketParams {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
    ComplexMatrix Q;
    ComplexMatrix P;
    double S = 0.0;
    double eps = 1.0;
    DetBranch branch;

    /// Validates shapes and the symplectic relations, sets the principal branch.
    static PacketParams make(Eigen::VectorXd q, Eigen::VectorXd p, ComplexMatrix Q, ComplexMatrix P, double S,
                             double eps);
    /// q = p = 0 style defaults: Q = I, P = iI.
    static PacketParams standard(Eigen::VectorXd q, Eigen::VectorXd p, double eps);

    int dim() const { return static_cast<int>(q.size()); }
    /// P Q^{-1}, complex symmetric with Im = (Q Q^*)^{-1}.
    ComplexMatrix PQinv() const;
};

/// Time derivative of (q, p, Q, P, S).
struct Tangent {
    Eigen::VectorXd dq;
    Eigen::VectorXd dp;
    ComplexMatrix dQ;
    ComplexMatrix dP;
    double dS = 0.0;
};

enum class Flow { classical, corrected };
std::string to_string(Flow f);

/// V^(1)(q,Q) = tr(Q Q^* D^2V(q)) / 4
double v1_correction(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot);
/// d/dq V^(1) = (Q Q^*)_{jk} D^3_{ijk}V(q) / 4
Eigen::VectorXd grad_v1(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot);

Tangent rhs_classical(const PacketParams& s, const PotentialModel& pot);
Tangent rhs_corrected(const PacketParams& s, const PotentialModel& pot);
Tangent rhs(Flow flow, const PacketParams& s, const PotentialModel& pot);

enum class Scheme { stormer_verlet, rk4 };

struct IntegratorConfig {
    Scheme scheme = Scheme::stormer_verlet;
    double dt = 1e-3;
    double t_end = 1.0;
    double refine_until = 1e-2;
    /// Number of equal output intervals; 0 stores every step.
    int snapshots = 0;
    /// Largest |delta arg det Q| per step before a StepSizeError.
    double max_branch_step = 1.5707963267948966;
    double max_invariant_drift = 1e-8;

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PacketParams> states;
    double dt = 0.0; // step actually used
};

PacketParams step(const PacketParams& s, Flow flow, const PotentialModel& pot, Scheme scheme, double dt,
                  double max_branch_step = 1.5707963267948966);
/// Integrates to cfg.t_end with uniform steps that land exactly on the output times.
Trajectory integrate(const PacketParams& s0, Flow flow, const PotentialModel& pot, const IntegratorConfig& cfg);

/// Observed order log2(|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|) of the final (q, p, Q, P, S).
double step_halving_order(const PacketParams& s0, Flow flow, const PotentialModel& pot, IntegratorConfig cfg);

double hamiltonian_eps(const PacketParams& s, const PotentialModel& pot);
double hamiltonian_classical(const PacketParams& s, const PotentialModel& pot);
/// J^eps = q <> p + (eps/2) Re(P Q^* - Q P^*), (q <> p)_ij = q_j p_i - q_i p_j.
Eigen::MatrixXd semiclassical_angular_momentum(const PacketParams& s);

/// (||Q^T P - P^T Q||_F, ||Q^* P - P^* Q - 2i I||_F)
std::pair<double, double> check_symplectic_invariants(const ComplexMatrix& Q, const ComplexMatrix& P);
inline std::pair<double, double> check_symplectic_invariants(const PacketParams& s) {
    return check_symplectic_invariants(s.Q, s.P);
}

/// CSV: t, q_i, p_i, Q_re_ij, Q_im_ij, P_re_ij, P_im_ij (row-major), S, H_eps, H_classical, r1, r2
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const PotentialModel& pot);

} // namespace gwp
