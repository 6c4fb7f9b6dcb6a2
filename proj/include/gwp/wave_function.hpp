#pragma once

#include <complex>

#include <Eigen/Dense>

#include "gwp/grid.hpp"

namespace gwp {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Complex samples of a function on a Grid, tagged with the semiclassical parameter.
class WaveFunction {
public:
    WaveFunction(Grid grid, double eps);
    WaveFunction(Grid grid, ComplexVector values, double eps);

    const Grid& grid() const { return grid_; }
    double eps() const { return eps_; }
    const ComplexVector& values() const { return values_; }
    ComplexVector& values() { return values_; }
    cplx operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

    /// Same grid and eps, values replaced.
    WaveFunction with_values(ComplexVector values) const;
    bool compatible(const WaveFunction& other) const;

    WaveFunction& operator+=(const WaveFunction& other);
    WaveFunction& operator-=(const WaveFunction& other);
    WaveFunction& operator*=(cplx c);

    friend WaveFunction operator+(WaveFunction a, const WaveFunction& b) { return a += b; }
    friend WaveFunction operator-(WaveFunction a, const WaveFunction& b) { return a -= b; }
    friend WaveFunction operator*(cplx c, WaveFunction a) { return a *= c; }
    friend WaveFunction operator*(WaveFunction a, cplx c) { return a *= c; }

    bool all_finite() const;

private:
    Grid grid_;
    ComplexVector values_;
    double eps_;
};

/// Throws GridMismatchError naming both grids unless a and b share grid and eps.
void require_compatible(const WaveFunction& a, const WaveFunction& b, const char* context);

} // namespace gwp
