#include <doctest.h>

#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gwp/errors.hpp"
#include "gwp/harness.hpp"
#include "gwp/residuals.hpp"
#include "test_support.hpp"

using namespace gwp;
using namespace gwp::test;

namespace {

const cplx I1(0.0, 1.0);
using big = boost::multiprecision::cpp_bin_float_50;

ComplexMatrix scalar(cplx z) { return ComplexMatrix::Constant(1, 1, z); }

// eps^{-2} (V(q) + V'y + V''y^2/2 + V'''y^3/6 - V(q+y)) for V = 1 - cos, in 50 digits.
double alpha1_torsional_oracle(double q, double y, double eps) {
    const big Q = q, Y = y, E = eps;
    const big s = sin(Q), c = cos(Q);
    const big taylor = (1 - c) + s * Y + c * Y * Y / 2 - s * Y * Y * Y / 6;
    const big r = (taylor - (1 - cos(Q + Y))) / (E * E);
    return r.convert_to<double>();
}

std::vector<Eigen::VectorXd> points_near(const Eigen::VectorXd& q, double spread, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, spread);
    std::vector<Eigen::VectorXd> out;
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd x = q;
        for (int i = 0; i < q.size(); ++i) x[i] += n(rng);
        out.push_back(x);
    }
    return out;
}

} // namespace

TEST_CASE("alpha splits into alpha0 + sqrt(eps) alpha1") {
    std::mt19937 rng(1);
    const PotentialModel pots[] = {PotentialModel::torsional(2), PotentialModel::gaussian_well(2, 1.0, 0.9)};
    for (const auto& pot : pots)
        for (double eps : {0.1, 0.01}) {
            const PacketParams s = generic_packet(2, eps, rng);
            const ResidualKernel k(s.q, s.Q, pot, eps);
            for (const auto& x : points_near(s.q, 3 * std::sqrt(eps), 50, 2)) {
                const AlphaParts a = k.alpha(x);
                CHECK(std::abs(a.full - (a.part0 + std::sqrt(eps) * a.part1)) <= 1e-10 * std::max(1.0, std::abs(a.full)));
                const double hag = k.alpha_hagedorn(x);
                CHECK(std::abs(hag - (a.full - k.grad_v1().dot(x - s.q) / std::sqrt(eps))) <=
                      1e-10 * std::max(1.0, std::abs(hag)));
            }
        }
}

TEST_CASE("residual multipliers vanish for quadratic potentials") {
    std::mt19937 rng(2);
    const PacketParams s = generic_packet(2, 0.05, rng);
    const PotentialModel pots[] = {PotentialModel::harmonic(vec({1.0, 2.0})), PotentialModel::free(2)};
    for (const auto& pot : pots)
        for (const auto& x : points_near(s.q, 1.0, 20, 3)) {
            const AlphaParts a = alpha(s.q, s.Q, pot, x, s.eps);
            CHECK(std::abs(a.full) < 1e-9);
            CHECK(std::abs(alpha_hagedorn(s.q, pot, x, s.eps)) < 1e-9);
            CHECK(beta(s.q, s.Q, pot, x, s.eps).full.norm() < 1e-9);
        }
    const Grid g = grid_for_packet(s, 3);
    const PotentialModel harm = PotentialModel::harmonic(vec({1.0, 2.0}));
    CHECK(l2_norm(zeta(s, harm, MultiIndex(2), g).base) < 1e-9);
    CHECK(third_state_coefficients(s.q, s.Q, harm).max_abs() == 0.0);
    for (const auto& [k, c] : orthogonality_projections(s, harm, g)) CHECK(std::abs(c) < 1e-9);
    CHECK(eta_zeta_identity_residual(s, harm, g) < 1e-9);
}

TEST_CASE("alpha1 against an extended-precision oracle") {
    const PotentialModel tor = PotentialModel::torsional(1);
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        for (double q : {0.0, 0.4, 1.3, -2.2}) {
            const ResidualKernel k(vec({q}), scalar(1.0), tor, eps);
            for (double u : {-3.0, -1.0, 0.5, 1.0, 2.5}) {
                const double y = u * std::sqrt(eps);
                const double ref = alpha1_torsional_oracle(q, y, eps);
                const double got = k.alpha(vec({q + y})).part1;
                CHECK(std::abs(got - ref) <= 1e-6 * std::max(1e-3, std::abs(ref)));
            }
        }
    }
}

TEST_CASE("beta is -i sqrt(eps) grad alpha") {
    std::mt19937 rng(4);
    const PotentialModel pot = PotentialModel::gaussian_well(2, 1.0, 1.1);
    const PacketParams s = generic_packet(2, 0.05, rng);
    const ResidualKernel k(s.q, s.Q, pot, s.eps);
    for (const auto& x : points_near(s.q, 0.5, 20, 5)) {
        const BetaParts b = k.beta(x);
        CHECK((b.full - (b.part0 + std::sqrt(s.eps) * b.part1)).norm() < 1e-10 * std::max(1.0, b.full.norm()));
        const double h = 1e-6;
        for (int i = 0; i < 2; ++i) {
            Eigen::VectorXd a = x, c = x;
            a[i] += h;
            c[i] -= h;
            const double fd = (k.alpha(a).full - k.alpha(c).full) / (2 * h);
            CHECK(std::abs(b.full[i] - (-I1 * std::sqrt(s.eps) * fd)) < 1e-5 * std::max(1.0, std::abs(b.full[i])));
            CHECK(std::abs(k.multiplier_gradient(x, Flow::corrected)[i] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
    const PacketParams t = standard_1d(0.7, 0.2, 0.01);
    CHECK(beta_spectral_discrepancy(t, PotentialModel::torsional(1), grid_for_packet(t, 4)) < 1e-7);
}

TEST_CASE("zeta norms stay bounded as eps shrinks") {
    const PotentialModel tor = PotentialModel::torsional(1);
    std::vector<std::pair<double, double>> z, xz, ez;
    for (double eps : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
        const PacketParams s = standard_1d(1.0, 0.0, eps);
        const ZetaNorms n = zeta_norms(s, tor, grid_for_packet(s, 4));
        z.emplace_back(eps, n.zeta);
        xz.emplace_back(eps, n.xi_zeta);
        ez.emplace_back(eps, n.eta_zeta);
    }
    for (const auto* pts : {&z, &xz, &ez}) {
        const FitResult f = fit_slope(*pts);
        CHECK(f.slope >= -0.1);
        CHECK(f.slope <= 0.1);
    }
}

TEST_CASE("eta zeta identity") {
    const PacketParams s = standard_1d(1.0, 0.0, 1e-2);
    CHECK(eta_zeta_identity_residual(s, PotentialModel::torsional(1), grid_for_packet(s, 4)) < 1e-7);
    std::mt19937 rng(6);
    const PacketParams s2 = generic_packet(2, 0.05, rng);
    CHECK(eta_zeta_identity_residual(s2, PotentialModel::gaussian_well(2, 1.0, 1.0), grid_for_packet(s2, 4)) < 1e-7);
}

TEST_CASE("third excited state coefficients") {
    const PotentialModel tor = PotentialModel::torsional(1);
    const double q = 0.8;
    const cplx Q(0.9, 0.3);
    const ThirdStateCoefficients c = third_state_coefficients(vec({q}), scalar(Q), tor);
    REQUIRE(c.coefficients.size() == 1);
    const double T = tor.eval(vec({q}), 3).flat(0);
    CHECK(std::abs(c.coefficients.at(MultiIndex{3}) - (-T * Q * Q * Q / (4 * std::sqrt(3.0)))) < 1e-14);

    // Projections of alpha0 phi0 onto phi_n by quadrature are an independent oracle for every c_n.
    std::mt19937 rng(7);
    const PotentialModel pots[] = {PotentialModel::torsional(2), PotentialModel::gaussian_well(2, 1.0, 1.0)};
    for (const auto& pot : pots)
        for (int trial = 0; trial < 3; ++trial) {
            const PacketParams s = generic_packet(2, 0.05, rng);
            const Grid g = grid_for_packet(s, 4);
            const BasisSet b = ladder_recurrence_eval(s, 3, g);
            const WaveFunction f =
                zeta(s, pot, b[MultiIndex(2)], Flow::corrected, ResidualComponent::alpha0_part).base;
            const ThirdStateCoefficients cc = third_state_coefficients(s.q, s.Q, pot);
            for (const auto& n : indices_of_order(2, 3))
                CHECK(std::abs(inner_product(b[n], f) - cc.coefficients.at(n)) < 1e-7 * l2_norm(f));
            CHECK(third_state_reconstruction_error(s, pot, g) < 1e-6);
            CHECK(orthogonality_defect(s, pot, g) < 1e-7);
            if (pot.eval(s.q, 3).max_abs() > 1e-3) CHECK(cc.max_abs() > 0.0);
        }
    const PacketParams s1 = standard_1d(1.0, 0.0, 0.01);
    const Grid g1 = grid_for_packet(s1, 4);
    CHECK(orthogonality_projections(s1, tor, g1).size() == 3);
    CHECK(orthogonality_defect(s1, tor, g1) < 1e-7);
    CHECK(third_state_reconstruction_error(s1, tor, g1) < 1e-6);
}

TEST_CASE("hagedorn first excited projection approaches its limit") {
    const PotentialModel tor = PotentialModel::torsional(1);
    double last = 1e300;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const PacketParams s = standard_1d(1.0, 0.0, eps);
        const ComplexVector proj = hagedorn_first_excited_projection(s, tor, grid_for_packet(s, 4));
        const ComplexVector lim = hagedorn_projection_limit(s, tor);
        const double rem = (proj - lim).norm();
        CHECK(rem < last);
        last = rem;
    }
    const PacketParams s = standard_1d(M_PI / 2, 0.0, 0.1);
    CHECK(hagedorn_projection_limit(s, tor)[0].real() == doctest::Approx(0.25 / std::sqrt(2.0)));
}

TEST_CASE("time derivatives of the basis match finite differences in time") {
    std::mt19937 rng(8);
    const PotentialModel pot = PotentialModel::gaussian_well(2, 1.0, 1.0);
    const PacketParams s = generic_packet(2, 0.05, rng);
    const Grid g = grid_for_packet(s, 4);
    for (Flow flow : {Flow::classical, Flow::corrected}) {
        const BasisSet rates = phi_time_derivatives(s, flow, pot, 2, g);
        const double h = 1e-4;
        const PacketParams fwd = step(s, flow, pot, Scheme::rk4, h), bwd = step(s, flow, pot, Scheme::rk4, -h);
        const BasisSet bf = ladder_recurrence_eval(fwd, 2, g), bb = ladder_recurrence_eval(bwd, 2, g);
        for (const auto& n : indices_up_to(2, 2)) {
            const WaveFunction fd = cplx(1.0 / (2 * h)) * (bf[n] - bb[n]);
            CHECK(l2_norm(fd - rates[n]) < 1e-5 * l2_norm(rates[n]));
        }
    }
}

TEST_CASE("Schrodinger-type residual identity") {
    const PacketParams s1 = standard_1d(1.0, 0.3, 0.01);
    const Grid g1 = grid_for_packet(s1, 4);
    std::mt19937 rng(9);
    const PacketParams s2 = generic_packet(2, 0.05, rng);
    const Grid g2 = grid_for_packet(s2, 4);
    for (Flow flow : {Flow::classical, Flow::corrected}) {
        CHECK(schrodinger_residual(s1, flow, PotentialModel::torsional(1), 2, g1) < 1e-6);
        CHECK(schrodinger_residual(s2, flow, PotentialModel::gaussian_well(2, 1.0, 1.0), 2, g2) < 1e-6);
        CHECK(schrodinger_residual(s2, flow, PotentialModel::torsional(2), MultiIndex{1, 1}, g2) < 1e-6);
    }
    // Dropping the residual term must break the identity.
    const WaveFunction phi0 = eval_phi0(s1, g1);
    CHECK(l2_norm(zeta(s1, PotentialModel::torsional(1), phi0).base) > 1e-3);
}

TEST_CASE("raising operator evolution identity") {
    std::mt19937 rng(10);
    const PacketParams s = generic_packet(2, 0.05, rng);
    const Grid g = grid_for_packet(s, 5);
    const BasisSet b = ladder_recurrence_eval(s, 2, g);
    std::normal_distribution<double> nrm;
    WaveFunction f(g, s.eps);
    for (const auto& n : b.indices()) f += cplx(nrm(rng), nrm(rng)) * b[n];
    for (Flow flow : {Flow::classical, Flow::corrected}) {
        CHECK(raising_evolution_residual(s, flow, PotentialModel::gaussian_well(2, 1.0, 1.0), f) < 1e-6);
        CHECK(raising_evolution_residual(s, flow, PotentialModel::torsional(2), b[MultiIndex(2)]) < 1e-6);
    }
}

TEST_CASE("wave function error vanishes for the harmonic oscillator") {
    const double eps = 0.05;
    const PacketParams s = standard_1d(1.0, 0.0, eps);
    const PotentialModel harm = PotentialModel::harmonic(vec({1.0}));
    IntegratorConfig ic;
    ic.dt = 1e-4;
    ic.snapshots = 5;
    ic.scheme = Scheme::rk4;
    const Trajectory tr = integrate(s, Flow::corrected, harm, ic);
    PacketExtent e;
    e.q_min = vec({-1.0});
    e.q_max = vec({1.0});
    e.max_abs_p = 1.0;
    e.max_q_sv = 1.0;
    e.max_p_norm = 1.0;
    SolverConfig sc{size_grid(e, eps), 1e-4, 1.0, uniform_times(1.0, 5), false, 1e-10, 6, 1e-9};
    const auto snaps = propagate(eval_phi0(s, sc.grid), harm, sc);
    for (double err : wavefunction_error(tr, harm, snaps, MultiIndex(1))) CHECK(err < 1e-7);
    CHECK_THROWS_AS(wavefunction_error(tr, harm, std::vector<Snapshot>(snaps.begin(), snaps.begin() + 2), MultiIndex(1)),
                    GridMismatchError);
}

TEST_CASE("magic formula over one short interval") {
    const PotentialModel tor = PotentialModel::torsional(1);
    const PacketParams s = standard_1d(1.0, 0.0, 0.02);
    const Grid g = grid_for_packet(s, 4);
    for (Flow flow : {Flow::classical, Flow::corrected}) {
        const MagicFormulaCheck coarse = magic_formula_check(s, flow, tor, MultiIndex(1), 0.1, g, 16);
        const MagicFormulaCheck fine = magic_formula_check(s, flow, tor, MultiIndex(1), 0.1, g, 32);
        CHECK(fine.z_norm > 0.0);
        CHECK(fine.discrepancy < 1e-3 * fine.z_norm);
        const double order = std::log2(coarse.discrepancy / fine.discrepancy);
        CHECK(order > 1.7);
    }
    CHECK_THROWS_AS(magic_formula_check(s, Flow::corrected, tor, MultiIndex(1), -0.1, g), ValidationError);
}
