#include <doctest.h>

#include <random>

#include "gwp/errors.hpp"
#include "gwp/potentials.hpp"
#include "test_support.hpp"

using namespace gwp;
using namespace gwp::test;

namespace {

std::vector<Eigen::VectorXd> random_points(int d, int count, double spread, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-spread, spread);
    std::vector<Eigen::VectorXd> pts;
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x[i] = u(rng);
        pts.push_back(x);
    }
    return pts;
}

} // namespace

TEST_CASE("torsional derivatives at the origin") {
    const PotentialModel v = PotentialModel::torsional(1);
    const Eigen::VectorXd x = vec({0.0});
    CHECK(v.eval(x, 0).flat(0) == 0.0);
    CHECK(v.eval(x, 1).flat(0) == 0.0);
    CHECK(v.eval(x, 2).flat(0) == 1.0);
    CHECK(v.eval(x, 3).flat(0) == 0.0);
    CHECK(v.eval(x, 4).flat(0) == -1.0);
    CHECK(v.eval(vec({M_PI / 2}), 3).flat(0) == doctest::Approx(-1.0));
    CHECK(v.hessian_bound() == 1.0);
    CHECK(v.satisfies_hypotheses());
    CHECK_THROWS_AS(v.eval(x, 5), ValidationError);
}

TEST_CASE("harmonic and free derivatives") {
    const PotentialModel h = PotentialModel::harmonic(vec({1.0, 2.0}));
    for (const auto& x : random_points(2, 10, 3.0, 1)) {
        CHECK(h.eval(x, 3).max_abs() == 0.0);
        CHECK(h.eval(x, 4).max_abs() == 0.0);
        CHECK(h.value(x) == doctest::Approx(0.5 * (x[0] * x[0] + 4 * x[1] * x[1])));
    }
    CHECK(h.is_quadratic());
    CHECK(h.satisfies_hypotheses());
    const PotentialModel f = PotentialModel::free(3);
    CHECK(f.is_quadratic());
    CHECK(check_derivatives(f, random_points(3, 20, 2.0, 2), 1e-3) == 0.0);
}

TEST_CASE("gaussian well at the origin") {
    const PotentialModel g = PotentialModel::gaussian_well(2, 1.0, 1.0);
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    CHECK(g.value(x) == 0.0);
    CHECK(g.gradient(x).norm() == 0.0);
    CHECK((g.hessian(x) - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-15);
    CHECK(std::isfinite(g.hessian_bound()));
    double sampled = 0.0;
    for (const auto& y : random_points(2, 2000, 4.0, 3)) sampled = std::max(sampled, g.hessian(y).cwiseAbs().maxCoeff());
    CHECK(sampled <= g.hessian_bound() + 1e-12);
}

TEST_CASE("analytic derivatives agree with central differences") {
    CHECK(check_derivatives(PotentialModel::harmonic(vec({1.0, 0.5})), random_points(2, 100, 3.0, 4), 1e-3) < 1e-8);
    CHECK(check_derivatives(PotentialModel::torsional(1), random_points(1, 100, 4.0, 5), 1e-3) < 1e-6);
    CHECK(check_derivatives(PotentialModel::torsional(3), random_points(3, 100, 4.0, 6), 1e-3) < 1e-6);
    CHECK(check_derivatives(PotentialModel::gaussian_well(2, 1.3, 0.8), random_points(2, 100, 2.0, 7), 1e-4) < 1e-6);
    CHECK(check_derivatives(PotentialModel::quartic(2, 0.7), random_points(2, 100, 2.0, 8), 1e-3) < 1e-6);
}

TEST_CASE("derivative tensors are symmetric") {
    const PotentialModel g = PotentialModel::gaussian_well(3, 1.0, 1.2);
    for (const auto& x : random_points(3, 10, 1.5, 9))
        for (int k = 2; k <= 4; ++k) CHECK(g.eval(x, k).symmetry_defect() < 1e-14);
}

TEST_CASE("quartic is flagged outside the hypotheses") {
    const PotentialModel q = PotentialModel::quartic(1, 1.0);
    CHECK_FALSE(q.satisfies_hypotheses());
    CHECK(std::isinf(q.hessian_bound()));
}

TEST_CASE("tensor contractions") {
    const PotentialModel g = PotentialModel::gaussian_well(2, 1.0, 0.9);
    const Eigen::VectorXd x = vec({0.3, -0.2}), y = vec({0.7, 0.4});
    const DerivativeTensor t3 = g.eval(x, 3);
    double full = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) full += t3.at({i, j, k}) * y[i] * y[j] * y[k];
    CHECK(t3.contract(y) == doctest::Approx(full));
    CHECK(t3.contract_to_vector(y).dot(y) == doctest::Approx(full));
    CHECK(y.dot(t3.contract_to_matrix(y) * y) == doctest::Approx(full));
    CHECK(t3.contract_matrix(y * y.transpose()).dot(y) == doctest::Approx(full));
}
