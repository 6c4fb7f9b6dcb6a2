#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gwp {

inline constexpr int kMaxDim = 3;
inline constexpr std::size_t kDefaultPointBudget = std::size_t{1} << 24;

/// Uniform periodic tensor grid on the box prod_i [c_i - L_i, c_i + L_i).
///
/// Storage order is row-major: the last axis varies fastest, matching the
/// layout FFTW expects for a rank-d transform.
class Grid {
public:
    /// Placeholder 8-point grid on [-1, 1).
    Grid();
    Grid(Eigen::VectorXd center, Eigen::VectorXd half_width, std::vector<int> points_per_axis,
         std::size_t point_budget = kDefaultPointBudget);

    /// Same N on every axis.
    static Grid cube(const Eigen::VectorXd& center, double half_width, int points,
                     std::size_t point_budget = kDefaultPointBudget);

    int dim() const { return static_cast<int>(n_.size()); }
    const Eigen::VectorXd& center() const { return center_; }
    const Eigen::VectorXd& half_width() const { return half_width_; }
    const Eigen::VectorXd& spacing() const { return spacing_; }
    const std::vector<int>& points_per_axis() const { return n_; }
    std::size_t size() const { return size_; }
    double cell_volume() const { return cell_volume_; }

    double coordinate(int axis, int index) const;
    const Eigen::VectorXd& axis_coordinates(int axis) const { return coords_[axis]; }

    /// Angular wavenumber of FFT bin `index` along `axis`: m * pi / L with m in [-N/2, N/2).
    double wavenumber(int axis, int index) const;
    bool is_nyquist(int axis, int index) const { return index == n_[axis] / 2; }

    std::array<int, kMaxDim> unravel(std::size_t flat) const;
    Eigen::VectorXd point(std::size_t flat) const;

    /// Same box with N doubled on every axis.
    Grid refined() const;

    std::string describe() const;

    bool operator==(const Grid& other) const;
    bool operator!=(const Grid& other) const { return !(*this == other); }

private:
    Eigen::VectorXd center_;
    Eigen::VectorXd half_width_;
    Eigen::VectorXd spacing_;
    std::vector<int> n_;
    std::vector<Eigen::VectorXd> coords_;
    std::size_t size_ = 0;
    double cell_volume_ = 0.0;
    std::size_t budget_ = kDefaultPointBudget;
};

/// Calls fn(flat_index, x) for every grid node in storage order.
template <class Fn>
void for_each_point(const Grid& grid, Fn&& fn) {
    const int d = grid.dim();
    Eigen::VectorXd x(d);
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (int a = 0; a < d; ++a) x[a] = grid.axis_coordinates(a)[0];
    const auto& n = grid.points_per_axis();
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        fn(flat, static_cast<const Eigen::VectorXd&>(x));
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < n[a]) {
                x[a] = grid.axis_coordinates(a)[idx[a]];
                break;
            }
            idx[a] = 0;
            x[a] = grid.axis_coordinates(a)[0];
        }
    }
}

/// Box sizing rule for a packet that must stay resolved along a trajectory.
struct GridSizing {
    double sigmas = 8.0;            // position standard deviations beyond the q-excursion
    double points_per_period = 5.0; // samples per period of exp(i p x / eps)
    double momentum_sigmas = 8.0;   // momentum standard deviations below Nyquist
    int max_order = 0;              // highest Hagedorn excitation that must fit
    int min_points = 8;
    std::size_t point_budget = kDefaultPointBudget;
};

/// Extent of a packet family, collected from one or more trajectories.
struct PacketExtent {
    Eigen::VectorXd q_min;
    Eigen::VectorXd q_max;
    double max_abs_p = 0.0;  // max_t |p(t)|_inf
    double max_q_sv = 0.0;   // max_t largest singular value of Q(t)
    double max_p_norm = 0.0; // max_t ||P(t)||_op
};

Grid size_grid(const PacketExtent& extent, double eps, const GridSizing& rule = {});

} // namespace gwp
