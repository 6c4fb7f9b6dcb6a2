#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace gwp {

/// Fully symmetric derivative tensor D^k V(x), flat row-major storage of d^k entries.
class DerivativeTensor {
public:
    DerivativeTensor(int order, int dim);

    int order() const { return order_; }
    int dim() const { return dim_; }

    double& at(std::initializer_list<int> idx);
    double at(std::initializer_list<int> idx) const;
    double& flat(std::size_t i) { return data_[i]; }
    double flat(std::size_t i) const { return data_[i]; }
    std::size_t size() const { return data_.size(); }

    /// Full contraction T . y^k
    double contract(const Eigen::VectorXd& y) const;
    /// (T . y^{k-1})_i, contracting all but the first index.
    Eigen::VectorXd contract_to_vector(const Eigen::VectorXd& y) const;
    /// (T . y^{k-2})_{ij}
    Eigen::MatrixXd contract_to_matrix(const Eigen::VectorXd& y) const;
    /// T_{i j k} M_{j k} for order 3.
    Eigen::VectorXd contract_matrix(const Eigen::MatrixXd& m) const;

    double max_abs() const;
    /// Largest |T_sigma(idx) - T_idx| over all index permutations.
    double symmetry_defect() const;

private:
    std::size_t offset(std::initializer_list<int> idx) const;

    int order_;
    int dim_;
    std::vector<double> data_;
};

struct FreePotential {};
struct HarmonicPotential {
    Eigen::VectorXd omega;
};
/// V = sum_i (1 - cos x_i)
struct TorsionalPotential {};
/// V = a (1 - exp(-|x|^2 / (2 w^2)))
struct GaussianWellPotential {
    double depth = 1.0;
    double width = 1.0;
};
/// V = c sum_i x_i^4 / 4; unbounded Hessian, so satisfies_hypotheses() is false.
struct QuarticPotential {
    double coefficient = 1.0;
};

using PotentialKind =
    std::variant<FreePotential, HarmonicPotential, TorsionalPotential, GaussianWellPotential, QuarticPotential>;

class PotentialModel {
public:
    static PotentialModel free(int dim);
    static PotentialModel harmonic(Eigen::VectorXd omega);
    static PotentialModel torsional(int dim);
    static PotentialModel gaussian_well(int dim, double depth, double width);
    static PotentialModel quartic(int dim, double coefficient);

    int dim() const { return dim_; }
    const PotentialKind& kind() const { return kind_; }
    std::string name() const;

    double lower_bound() const { return lower_bound_; }
    /// sup_x max_ij |D^2_ij V(x)|; infinity when unbounded.
    double hessian_bound() const { return hessian_bound_; }
    bool satisfies_hypotheses() const { return satisfies_hypotheses_; }
    bool is_quadratic() const;

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
    /// D^k V(x) for k in 0..4; throws ValidationError for k > 4.
    DerivativeTensor eval(const Eigen::VectorXd& x, int order) const;

private:
    PotentialModel(int dim, PotentialKind kind, double lower, double hess_bound, bool hyp);

    int dim_;
    PotentialKind kind_;
    double lower_bound_;
    double hessian_bound_;
    bool satisfies_hypotheses_;
};

/// Max relative mismatch between central differences of D^{k-1}V and D^k V, k = 1..4.
double check_derivatives(const PotentialModel& pot, const std::vector<Eigen::VectorXd>& points, double h);

} // namespace gwp
