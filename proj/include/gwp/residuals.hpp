#pragma once

#include <map>
#include <vector>

#include "gwp/hagedorn_basis.hpp"
#include "gwp/reference_solver.hpp"

namespace gwp {

/// alpha = alpha0 + sqrt(eps) alpha1 at one point.
struct AlphaParts {
    double full = 0.0;
    double part0 = 0.0;
    double part1 = 0.0;
};

/// Residual multiplier of the corrected flow at x.
/// alpha1 uses the Taylor-difference form eps^{-2}(sum_{k<=3} D^kV(q)(x-q)^k/k! - V(x)).
AlphaParts alpha(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot,
                 const Eigen::VectorXd& x, double eps);

/// Residual multiplier of the classical flow: eps^{-3/2}(sum_{k<=2} D^kV(q)(x-q)^k/k! - V(x)).
double alpha_hagedorn(const Eigen::VectorXd& q, const PotentialModel& pot, const Eigen::VectorXd& x, double eps);

/// Complex d-vector beta_i = -i sqrt(eps) d_i alpha, split as beta0 + sqrt(eps) beta1.
struct BetaParts {
    ComplexVector full;
    ComplexVector part0;
    ComplexVector part1;
};

/// Precomputed derivative data at q for evaluating alpha/beta over many points.
class ResidualKernel {
public:
    ResidualKernel(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot, double eps);

    AlphaParts alpha(const Eigen::VectorXd& x) const;
    double alpha_hagedorn(const Eigen::VectorXd& x) const;
    /// Residual multiplier of the given flow.
    double multiplier(const Eigen::VectorXd& x, Flow flow) const;
    /// grad_x of the residual multiplier, analytic.
    Eigen::VectorXd multiplier_gradient(const Eigen::VectorXd& x, Flow flow) const;
    BetaParts beta(const Eigen::VectorXd& x) const;

    const Eigen::VectorXd& grad_v1() const { return grad_v1_; }

private:
    Eigen::VectorXd q_;
    const PotentialModel* pot_;
    double eps_;
    double v0_;
    Eigen::VectorXd dv_;
    Eigen::MatrixXd d2v_;
    DerivativeTensor d3v_;
    Eigen::VectorXd grad_v1_;
};

BetaParts beta(const Eigen::VectorXd& q, const ComplexMatrix& Q, const PotentialModel& pot,
               const Eigen::VectorXd& x, double eps);

enum class ResidualComponent { full, alpha0_part, alpha1_part };

/// zeta_n = alpha phi_n (or one of its parts) sampled on a grid.
struct ResidualField {
    WaveFunction base;
    ResidualComponent component = ResidualComponent::full;
    double eps = 0.0;
};

/// Multiplies phi_n by the residual multiplier of `flow` (alpha for corrected, alpha_hagedorn for classical).
ResidualField zeta(const PacketParams& params, const PotentialModel& pot, const WaveFunction& phi_n,
                   Flow flow = Flow::corrected, ResidualComponent component = ResidualComponent::full);
ResidualField zeta(const PacketParams& params, const PotentialModel& pot, const MultiIndex& n, const Grid& grid,
                   Flow flow = Flow::corrected, ResidualComponent component = ResidualComponent::full);

/// Norms of zeta_0, xi_i zeta_0 and eta_i zeta_0 (max over i), for the O(1) estimates.
struct ZetaNorms {
    double zeta = 0.0;
    double xi_zeta = 0.0;
    double eta_zeta = 0.0;
};
ZetaNorms zeta_norms(const PacketParams& params, const PotentialModel& pot, const Grid& grid);

/// Relative mismatch || p(alpha phi0) - alpha p(phi0) - sqrt(eps) beta phi0 || / ||sqrt(eps) beta phi0||,
/// a spectral check of the analytic beta.
double beta_spectral_discrepancy(const PacketParams& params, const PotentialModel& pot, const Grid& grid);

/// max_i || eta_i zeta_0 - beta_i phi_0 - (P Q^{-1})_ij xi_j zeta_0 ||
double eta_zeta_identity_residual(const PacketParams& params, const PotentialModel& pot, const Grid& grid);

/// Coefficients c_n, |n| = 3, with alpha0 phi0 = sum_n c_n phi_n.
struct ThirdStateCoefficients {
    std::map<MultiIndex, cplx> coefficients;
    double max_abs() const;
};
ThirdStateCoefficients third_state_coefficients(const Eigen::VectorXd& q, const ComplexMatrix& Q,
                                                const PotentialModel& pot);

/// <alpha0 phi0, phi_k> for all |k| <= 2.
std::map<MultiIndex, cplx> orthogonality_projections(const PacketParams& params, const PotentialModel& pot,
                                                     const Grid& grid);
/// max_k |<alpha0 phi0, phi_k>| / ||alpha0 phi0||, or the absolute value when alpha0 phi0 vanishes.
double orthogonality_defect(const PacketParams& params, const PotentialModel& pot, const Grid& grid);
/// ||alpha0 phi0 - sum c_n phi_n|| / ||alpha0 phi0|| (absolute when alpha0 phi0 vanishes).
double third_state_reconstruction_error(const PacketParams& params, const PotentialModel& pot, const Grid& grid);

/// <zeta0^Hag, phi_{e_j}> for j = 1..d.
ComplexVector hagedorn_first_excited_projection(const PacketParams& params, const PotentialModel& pot,
                                                const Grid& grid);
/// -(1/sqrt 2) Q^*_{jc} d_{q_c} V^(1), the eps -> 0 limit of the projection above.
ComplexVector hagedorn_projection_limit(const PacketParams& params, const PotentialModel& pot);

/// d/dt phi_n for all |n| <= max_order along `flow`, assembled by the chain rule from the ODE right-hand side.
BasisSet phi_time_derivatives(const PacketParams& params, Flow flow, const PotentialModel& pot, int max_order,
                              const Grid& grid);

/// || i eps dphi_n/dt - H phi_n - eps^{3/2} zeta_n || / || H phi_n ||, maximized over |n| <= max_order.
double schrodinger_residual(const PacketParams& params, Flow flow, const PotentialModel& pot, int max_order,
                            const Grid& grid);
double schrodinger_residual(const PacketParams& params, Flow flow, const PotentialModel& pot,
                            const MultiIndex& n, const Grid& grid);

/// max_j || (i eps dA^*_j/dt + [A^*_j, H]) f - (eps^2/sqrt 2)(Q^* grad alpha)_j f || relative to
/// max_j || i eps dA^*_j/dt f ||.
double raising_evolution_residual(const PacketParams& params, Flow flow, const PotentialModel& pot,
                                  const WaveFunction& f);

/// ||psi(t) - phi_n(t)|| per trajectory sample. reference[k] must sit at traj.times[k] on a shared grid.
std::vector<double> wavefunction_error(const Trajectory& traj, const PotentialModel& pot,
                                       const std::vector<Snapshot>& reference, const MultiIndex& n);

/// One-step check of Z_n(h) = i sqrt(eps) int_0^h exp(-iH(h-s)/eps) zeta_n(s) ds with trapezoid quadrature.
struct MagicFormulaCheck {
    double z_norm = 0.0;       // ||psi(h) - phi_n(h)||
    double discrepancy = 0.0;  // ||Z_n(h) - quadrature||
};
MagicFormulaCheck magic_formula_check(const PacketParams& params, Flow flow, const PotentialModel& pot,
                                      const MultiIndex& n, double h, const Grid& grid, int substeps = 64);

} // namespace gwp
