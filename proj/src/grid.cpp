#include "gwp/grid.hpp"

#include <cmath>
#include <sstream>

#include "gwp/errors.hpp"

namespace gwp {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(double n) {
    int p = 1;
    while (p < n) {
        if (p > (1 << 28)) throw ValidationError("grid: requested point count overflows");
        p <<= 1;
    }
    return p;
}

} // namespace

Grid::Grid(Eigen::VectorXd center, Eigen::VectorXd half_width, std::vector<int> points_per_axis,
           std::size_t point_budget)
    : center_(std::move(center)), half_width_(std::move(half_width)), n_(std::move(points_per_axis)),
      budget_(point_budget) {
    const int d = static_cast<int>(n_.size());
    if (d < 1 || d > kMaxDim) throw ValidationError("grid: dimension must be in 1..3, got " + std::to_string(d));
    if (center_.size() != d || half_width_.size() != d)
        throw ValidationError("grid: center/half_width size does not match dimension");
    spacing_.resize(d);
    size_ = 1;
    cell_volume_ = 1.0;
    coords_.resize(d);
    for (int a = 0; a < d; ++a) {
        if (!is_power_of_two(n_[a]) || n_[a] < 8)
            throw ValidationError("grid: points per axis must be a power of two >= 8, got " +
                                  std::to_string(n_[a]));
        if (!(half_width_[a] > 0.0) || !std::isfinite(half_width_[a]) || !std::isfinite(center_[a]))
            throw ValidationError("grid: half width must be positive and finite");
        spacing_[a] = 2.0 * half_width_[a] / n_[a];
        cell_volume_ *= spacing_[a];
        if (size_ > budget_ / static_cast<std::size_t>(n_[a]))
            throw ValidationError("grid: point count exceeds budget of " + std::to_string(budget_));
        size_ *= static_cast<std::size_t>(n_[a]);
        coords_[a].resize(n_[a]);
        for (int i = 0; i < n_[a]; ++i) coords_[a][i] = center_[a] - half_width_[a] + i * spacing_[a];
    }
}

Grid::Grid() : Grid(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), std::vector<int>{8}) {}

Grid Grid::cube(const Eigen::VectorXd& center, double half_width, int points, std::size_t point_budget) {
    const auto d = center.size();
    return Grid(center, Eigen::VectorXd::Constant(d, half_width), std::vector<int>(d, points), point_budget);
}

double Grid::coordinate(int axis, int index) const { return coords_.at(axis)[index]; }

double Grid::wavenumber(int axis, int index) const {
    const int n = n_.at(axis);
    const int m = index < n / 2 ? index : index - n;
    return m * M_PI / half_width_[axis];
}

std::array<int, kMaxDim> Grid::unravel(std::size_t flat) const {
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (int a = dim() - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % n_[a]);
        flat /= n_[a];
    }
    return idx;
}

Eigen::VectorXd Grid::point(std::size_t flat) const {
    auto idx = unravel(flat);
    Eigen::VectorXd x(dim());
    for (int a = 0; a < dim(); ++a) x[a] = coords_[a][idx[a]];
    return x;
}

Grid Grid::refined() const {
    std::vector<int> n2 = n_;
    for (auto& n : n2) n *= 2;
    return Grid(center_, half_width_, n2, budget_);
}

std::string Grid::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "Grid(d=" << dim();
    for (int a = 0; a < dim(); ++a)
        os << " [" << center_[a] - half_width_[a] << "," << center_[a] + half_width_[a] << ")x" << n_[a];
    os << ")";
    return os.str();
}

bool Grid::operator==(const Grid& o) const {
    return n_ == o.n_ && center_ == o.center_ && half_width_ == o.half_width_;
}

Grid size_grid(const PacketExtent& e, double eps, const GridSizing& rule) {
    const int d = static_cast<int>(e.q_min.size());
    if (d < 1 || d > kMaxDim || e.q_max.size() != d) throw ValidationError("size_grid: bad extent dimension");
    if (!(eps > 0.0)) throw ValidationError("size_grid: eps must be positive");
    const double widen = 2.0 * std::sqrt(static_cast<double>(rule.max_order));
    const double pos_std = std::sqrt(eps) * e.max_q_sv;
    const double mom_std = std::sqrt(eps) * e.max_p_norm;

    const double dx_phase = 2.0 * M_PI * eps / (rule.points_per_period * (e.max_abs_p + mom_std));
    const double dx_band = M_PI * eps / (e.max_abs_p + (rule.momentum_sigmas + widen) * mom_std);
    const double dx = std::min(dx_phase, dx_band);

    Eigen::VectorXd center(d), half(d);
    std::vector<int> n(d);
    for (int a = 0; a < d; ++a) {
        center[a] = 0.5 * (e.q_min[a] + e.q_max[a]);
        half[a] = 0.5 * (e.q_max[a] - e.q_min[a]) + (rule.sigmas + widen) * pos_std;
        n[a] = std::max(next_power_of_two(2.0 * half[a] / dx), next_power_of_two(rule.min_points));
    }
    return Grid(center, half, n, rule.point_budget);
}

} // namespace gwp
