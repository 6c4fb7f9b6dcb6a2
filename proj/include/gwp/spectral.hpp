#pragma once

#include <memory>

#include "gwp/grid.hpp"
#include "gwp/wave_function.hpp"

namespace gwp {

/// FFTW plan pair for one grid shape. Forward is unnormalized, backward divides by N.
///
/// Plan creation and destruction are serialized internally because the FFTW
/// planner is not reentrant; execution is safe from concurrent workers that
/// each own their own Spectral instance.
class Spectral {
public:
    explicit Spectral(const Grid& grid);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;
    Spectral(Spectral&&) noexcept;
    Spectral& operator=(Spectral&&) noexcept;

    const Grid& grid() const;
    void forward(ComplexVector& data) const;
    void backward(ComplexVector& data) const;

    /// |k|^2 per spectral bin, in FFT storage order.
    const Eigen::VectorXd& wavenumber_squared() const;
    /// k_axis per spectral bin with the Nyquist bin zeroed (first-derivative symbol).
    const Eigen::VectorXd& derivative_symbol(int axis) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Per-thread cache of Spectral instances keyed by grid.
std::shared_ptr<const Spectral> cached_spectral(const Grid& grid);

/// Fraction of spectral energy in bins with |k_i| > 7/8 k_Nyquist on any axis.
double spectral_tail_fraction(const WaveFunction& f);
/// Fraction of |f|^2 within 1/16 of the box width from any face.
double boundary_mass_fraction(const WaveFunction& f);

/// Trigonometric interpolation of f onto a grid with the same box and more points per axis.
WaveFunction prolongate(const WaveFunction& f, const Grid& finer);

} // namespace gwp
