#include "gwp/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gwp/errors.hpp"

namespace gwp {

namespace {

std::size_t ipow(int base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(base);
    return r;
}

// Multi-index of a flat offset, first index slowest.
std::array<int, 4> digits(std::size_t flat, int order, int dim) {
    std::array<int, 4> idx{0, 0, 0, 0};
    for (int k = order - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(flat % dim);
        flat /= dim;
    }
    return idx;
}

void require_dim(const Eigen::VectorXd& x, int d) {
    if (x.size() != d) throw ValidationError("potential: point has dimension " + std::to_string(x.size()) +
                                             ", expected " + std::to_string(d));
    if (!x.allFinite()) throw ValidationError("potential: non-finite evaluation point");
}

int kron(int a, int b) { return a == b ? 1 : 0; }

} // namespace

DerivativeTensor::DerivativeTensor(int order, int dim) : order_(order), dim_(dim), data_(ipow(dim, order), 0.0) {
    if (order < 0 || order > 4) throw ValidationError("derivative tensor: unsupported order " + std::to_string(order));
}

std::size_t DerivativeTensor::offset(std::initializer_list<int> idx) const {
    if (static_cast<int>(idx.size()) != order_) throw ValidationError("derivative tensor: wrong index count");
    std::size_t off = 0;
    for (int i : idx) {
        if (i < 0 || i >= dim_) throw ValidationError("derivative tensor: index out of range");
        off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    }
    return off;
}

double& DerivativeTensor::at(std::initializer_list<int> idx) { return data_[offset(idx)]; }
double DerivativeTensor::at(std::initializer_list<int> idx) const { return data_[offset(idx)]; }

double DerivativeTensor::contract(const Eigen::VectorXd& y) const {
    double s = 0.0;
    for (std::size_t f = 0; f < data_.size(); ++f) {
        if (data_[f] == 0.0) continue;
        auto idx = digits(f, order_, dim_);
        double term = data_[f];
        for (int k = 0; k < order_; ++k) term *= y[idx[k]];
        s += term;
    }
    return s;
}

Eigen::VectorXd DerivativeTensor::contract_to_vector(const Eigen::VectorXd& y) const {
    if (order_ < 1) throw ValidationError("derivative tensor: contract_to_vector needs order >= 1");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
    for (std::size_t f = 0; f < data_.size(); ++f) {
        if (data_[f] == 0.0) continue;
        auto idx = digits(f, order_, dim_);
        double term = data_[f];
        for (int k = 1; k < order_; ++k) term *= y[idx[k]];
        out[idx[0]] += term;
    }
    return out;
}

Eigen::MatrixXd DerivativeTensor::contract_to_matrix(const Eigen::VectorXd& y) const {
    if (order_ < 2) throw ValidationError("derivative tensor: contract_to_matrix needs order >= 2");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_, dim_);
    for (std::size_t f = 0; f < data_.size(); ++f) {
        if (data_[f] == 0.0) continue;
        auto idx = digits(f, order_, dim_);
        double term = data_[f];
        for (int k = 2; k < order_; ++k) term *= y[idx[k]];
        out(idx[0], idx[1]) += term;
    }
    return out;
}

Eigen::VectorXd DerivativeTensor::contract_matrix(const Eigen::MatrixXd& m) const {
    if (order_ != 3) throw ValidationError("derivative tensor: contract_matrix needs order 3");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
    for (std::size_t f = 0; f < data_.size(); ++f) {
        auto idx = digits(f, order_, dim_);
        out[idx[0]] += data_[f] * m(idx[1], idx[2]);
    }
    return out;
}

double DerivativeTensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double DerivativeTensor::symmetry_defect() const {
    double worst = 0.0;
    for (std::size_t f = 0; f < data_.size(); ++f) {
        auto idx = digits(f, order_, dim_);
        std::sort(idx.begin(), idx.begin() + order_);
        std::size_t g = 0;
        for (int k = 0; k < order_; ++k) g = g * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx[k]);
        worst = std::max(worst, std::abs(data_[f] - data_[g]));
    }
    return worst;
}

PotentialModel::PotentialModel(int dim, PotentialKind kind, double lower, double hess_bound, bool hyp)
    : dim_(dim), kind_(std::move(kind)), lower_bound_(lower), hessian_bound_(hess_bound), satisfies_hypotheses_(hyp) {
    if (dim < 1 || dim > 3) throw ValidationError("potential: dimension must be in 1..3");
}

PotentialModel PotentialModel::free(int dim) { return PotentialModel(dim, FreePotential{}, 0.0, 0.0, true); }

PotentialModel PotentialModel::harmonic(Eigen::VectorXd omega) {
    if (!omega.allFinite()) throw ValidationError("harmonic: non-finite frequency");
    const double bound = omega.size() ? omega.cwiseAbs2().maxCoeff() : 0.0;
    const int d = static_cast<int>(omega.size());
    return PotentialModel(d, HarmonicPotential{std::move(omega)}, 0.0, bound, true);
}

PotentialModel PotentialModel::torsional(int dim) { return PotentialModel(dim, TorsionalPotential{}, 0.0, 1.0, true); }

PotentialModel PotentialModel::gaussian_well(int dim, double depth, double width) {
    if (!(depth > 0.0) || !(width > 0.0)) throw ValidationError("gaussian_well: depth and width must be positive");
    return PotentialModel(dim, GaussianWellPotential{depth, width}, 0.0, depth / (width * width), true);
}

PotentialModel PotentialModel::quartic(int dim, double coefficient) {
    if (!(coefficient > 0.0)) throw ValidationError("quartic: coefficient must be positive");
    return PotentialModel(dim, QuarticPotential{coefficient}, 0.0, std::numeric_limits<double>::infinity(), false);
}

std::string PotentialModel::name() const {
    struct Namer {
        std::string operator()(const FreePotential&) const { return "free"; }
        std::string operator()(const HarmonicPotential&) const { return "harmonic"; }
        std::string operator()(const TorsionalPotential&) const { return "torsional"; }
        std::string operator()(const GaussianWellPotential&) const { return "gaussian_well"; }
        std::string operator()(const QuarticPotential&) const { return "quartic"; }
    };
    return std::visit(Namer{}, kind_);
}

bool PotentialModel::is_quadratic() const {
    return std::holds_alternative<FreePotential>(kind_) || std::holds_alternative<HarmonicPotential>(kind_);
}

double PotentialModel::value(const Eigen::VectorXd& x) const { return eval(x, 0).flat(0); }

Eigen::VectorXd PotentialModel::gradient(const Eigen::VectorXd& x) const {
    auto t = eval(x, 1);
    Eigen::VectorXd g(dim_);
    for (int i = 0; i < dim_; ++i) g[i] = t.flat(i);
    return g;
}

Eigen::MatrixXd PotentialModel::hessian(const Eigen::VectorXd& x) const {
    auto t = eval(x, 2);
    Eigen::MatrixXd h(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) h(i, j) = t.flat(static_cast<std::size_t>(i * dim_ + j));
    return h;
}

DerivativeTensor PotentialModel::eval(const Eigen::VectorXd& x, int order) const {
    if (order < 0 || order > 4)
        throw ValidationError("potential: unsupported derivative order " + std::to_string(order) + " (max 4)");
    require_dim(x, dim_);
    DerivativeTensor t(order, dim_);
    const int d = dim_;

    // Separable kinds: only the all-equal index entries are nonzero.
    auto separable = [&](auto&& deriv) {
        if (order == 0) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) s += deriv(i, 0);
            t.flat(0) = s;
            return;
        }
        for (int i = 0; i < d; ++i) {
            std::size_t off = 0;
            for (int k = 0; k < order; ++k) off = off * static_cast<std::size_t>(d) + static_cast<std::size_t>(i);
            t.flat(off) = deriv(i, order);
        }
    };

    std::visit(
        [&](const auto& kind) {
            using K = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<K, FreePotential>) {
            } else if constexpr (std::is_same_v<K, HarmonicPotential>) {
                separable([&](int i, int k) {
                    const double w2 = kind.omega[i] * kind.omega[i];
                    switch (k) {
                    case 0: return 0.5 * w2 * x[i] * x[i];
                    case 1: return w2 * x[i];
                    case 2: return w2;
                    default: return 0.0;
                    }
                });
            } else if constexpr (std::is_same_v<K, TorsionalPotential>) {
                separable([&](int i, int k) {
                    switch (k) {
                    case 0: return 1.0 - std::cos(x[i]);
                    case 1: return std::sin(x[i]);
                    case 2: return std::cos(x[i]);
                    case 3: return -std::sin(x[i]);
                    default: return -std::cos(x[i]);
                    }
                });
            } else if constexpr (std::is_same_v<K, QuarticPotential>) {
                const double c = kind.coefficient;
                separable([&](int i, int k) {
                    const double y = x[i];
                    switch (k) {
                    case 0: return 0.25 * c * y * y * y * y;
                    case 1: return c * y * y * y;
                    case 2: return 3.0 * c * y * y;
                    case 3: return 6.0 * c * y;
                    default: return 6.0 * c;
                    }
                });
            } else {
                // V = a (1 - g), g = exp(-s |x|^2 / 2), s = 1/w^2
                const double a = kind.depth;
                const double s = 1.0 / (kind.width * kind.width);
                const double g = std::exp(-0.5 * s * x.squaredNorm());
                if (order == 0) {
                    t.flat(0) = a * (1.0 - g);
                    return;
                }
                for (std::size_t f = 0; f < t.size(); ++f) {
                    auto id = digits(f, order, d);
                    double dg = 0.0;
                    if (order == 1) {
                        dg = -s * x[id[0]];
                    } else if (order == 2) {
                        const int i = id[0], j = id[1];
                        dg = s * s * x[i] * x[j] - s * kron(i, j);
                    } else if (order == 3) {
                        const int i = id[0], j = id[1], k = id[2];
                        dg = -s * s * s * x[i] * x[j] * x[k] +
                             s * s * (kron(i, j) * x[k] + kron(i, k) * x[j] + kron(j, k) * x[i]);
                    } else {
                        const int i = id[0], j = id[1], k = id[2], l = id[3];
                        dg = s * s * s * s * x[i] * x[j] * x[k] * x[l] -
                             s * s * s *
                                 (kron(i, j) * x[k] * x[l] + kron(i, k) * x[j] * x[l] + kron(i, l) * x[j] * x[k] +
                                  kron(j, k) * x[i] * x[l] + kron(j, l) * x[i] * x[k] + kron(k, l) * x[i] * x[j]) +
                             s * s * (kron(i, j) * kron(k, l) + kron(i, k) * kron(j, l) + kron(i, l) * kron(j, k));
                    }
                    t.flat(f) = -a * dg * g;
                }
            }
        },
        kind_);
    return t;
}

double check_derivatives(const PotentialModel& pot, const std::vector<Eigen::VectorXd>& points, double h) {
    if (!(h >= 1e-6 && h <= 1e-2)) throw ValidationError("check_derivatives: step must lie in [1e-6, 1e-2]");
    const int d = pot.dim();
    double worst = 0.0;
    for (const auto& x : points) {
        for (int k = 1; k <= 4; ++k) {
            const DerivativeTensor exact = pot.eval(x, k);
            const double scale = std::max(1.0, exact.max_abs());
            for (int j = 0; j < d; ++j) {
                Eigen::VectorXd xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                const DerivativeTensor up = pot.eval(xp, k - 1);
                const DerivativeTensor dn = pot.eval(xm, k - 1);
                for (std::size_t f = 0; f < up.size(); ++f) {
                    const double fd = (up.flat(f) - dn.flat(f)) / (2.0 * h);
                    const double ex = exact.flat(f * static_cast<std::size_t>(d) + static_cast<std::size_t>(j));
                    worst = std::max(worst, std::abs(fd - ex) / scale);
                }
            }
        }
    }
    return worst;
}

} // namespace gwp
