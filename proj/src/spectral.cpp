#include "gwp/spectral.hpp"

#include <cmath>
#include <deque>
#include <mutex>

#include <fftw3.h>

#include "gwp/errors.hpp"

namespace gwp {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

struct Spectral::Impl {
    Grid grid;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    Eigen::VectorXd k2;
    std::vector<Eigen::VectorXd> dk;

    explicit Impl(const Grid& g) : grid(g) {
        const int d = g.dim();
        std::vector<int> n(g.points_per_axis());
        ComplexVector scratch(static_cast<Eigen::Index>(g.size()));
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
            fwd = fftw_plan_dft(d, n.data(), buf, buf, FFTW_FORWARD, flags);
            bwd = fftw_plan_dft(d, n.data(), buf, buf, FFTW_BACKWARD, flags);
        }
        if (!fwd || !bwd) throw NumericalError("spectral: FFTW plan creation failed for " + g.describe());

        k2.setZero(static_cast<Eigen::Index>(g.size()));
        dk.assign(d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size())));
        for (std::size_t flat = 0; flat < g.size(); ++flat) {
            auto idx = g.unravel(flat);
            double s = 0.0;
            for (int a = 0; a < d; ++a) {
                const double k = g.wavenumber(a, idx[a]);
                s += k * k;
                dk[a][static_cast<Eigen::Index>(flat)] = g.is_nyquist(a, idx[a]) ? 0.0 : k;
            }
            k2[static_cast<Eigen::Index>(flat)] = s;
        }
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

Spectral::Spectral(const Grid& grid) : impl_(std::make_unique<Impl>(grid)) {}
Spectral::~Spectral() = default;
Spectral::Spectral(Spectral&&) noexcept = default;
Spectral& Spectral::operator=(Spectral&&) noexcept = default;

const Grid& Spectral::grid() const { return impl_->grid; }

void Spectral::forward(ComplexVector& data) const {
    if (static_cast<std::size_t>(data.size()) != impl_->grid.size())
        throw GridMismatchError("spectral: data size does not match " + impl_->grid.describe());
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(impl_->fwd, buf, buf);
}

void Spectral::backward(ComplexVector& data) const {
    if (static_cast<std::size_t>(data.size()) != impl_->grid.size())
        throw GridMismatchError("spectral: data size does not match " + impl_->grid.describe());
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(impl_->bwd, buf, buf);
    data /= static_cast<double>(impl_->grid.size());
}

const Eigen::VectorXd& Spectral::wavenumber_squared() const { return impl_->k2; }
const Eigen::VectorXd& Spectral::derivative_symbol(int axis) const { return impl_->dk.at(axis); }

std::shared_ptr<const Spectral> cached_spectral(const Grid& grid) {
    thread_local std::deque<std::shared_ptr<const Spectral>> cache;
    for (const auto& s : cache)
        if (s->grid() == grid) return s;
    auto s = std::make_shared<const Spectral>(grid);
    cache.push_front(s);
    if (cache.size() > 8) cache.pop_back();
    return s;
}

double spectral_tail_fraction(const WaveFunction& f) {
    const Grid& g = f.grid();
    ComplexVector c = f.values();
    cached_spectral(g)->forward(c);
    double total = 0.0, tail = 0.0;
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        const double w = std::norm(c[static_cast<Eigen::Index>(flat)]);
        total += w;
        auto idx = g.unravel(flat);
        for (int a = 0; a < g.dim(); ++a) {
            const int n = g.points_per_axis()[a];
            const int m = idx[a] < n / 2 ? idx[a] : idx[a] - n;
            if (8 * std::abs(m) > 7 * (n / 2)) {
                tail += w;
                break;
            }
        }
    }
    return total > 0.0 ? tail / total : 0.0;
}

double boundary_mass_fraction(const WaveFunction& f) {
    const Grid& g = f.grid();
    double total = 0.0, edge = 0.0;
    for_each_point(g, [&](std::size_t flat, const Eigen::VectorXd& x) {
        const double w = std::norm(f[flat]);
        total += w;
        for (int a = 0; a < g.dim(); ++a) {
            const double band = 2.0 * g.half_width()[a] / 16.0;
            const double lo = x[a] - (g.center()[a] - g.half_width()[a]);
            const double hi = (g.center()[a] + g.half_width()[a]) - x[a];
            if (lo < band || hi < band) {
                edge += w;
                break;
            }
        }
    });
    return total > 0.0 ? edge / total : 0.0;
}

WaveFunction prolongate(const WaveFunction& f, const Grid& finer) {
    const Grid& g = f.grid();
    if (g.dim() != finer.dim() || g.center() != finer.center() || g.half_width() != finer.half_width())
        throw GridMismatchError("prolongate: boxes differ between " + g.describe() + " and " + finer.describe());
    const int d = g.dim();
    for (int a = 0; a < d; ++a)
        if (finer.points_per_axis()[a] < g.points_per_axis()[a])
            throw GridMismatchError("prolongate: target grid is coarser than " + g.describe());
    if (g == finer) return f;

    ComplexVector c = f.values();
    cached_spectral(g)->forward(c);
    ComplexVector out = ComplexVector::Zero(static_cast<Eigen::Index>(finer.size()));

    std::vector<std::size_t> stride(d, 1);
    for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * finer.points_per_axis()[a + 1];

    const double scale = static_cast<double>(finer.size()) / static_cast<double>(g.size());
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        auto idx = g.unravel(flat);
        // Per axis: one target bin, or two half-weight bins for the Nyquist mode.
        std::array<std::array<int, 2>, kMaxDim> bins{};
        std::array<int, kMaxDim> count{};
        std::array<double, kMaxDim> weight{};
        for (int a = 0; a < d; ++a) {
            const int n = g.points_per_axis()[a];
            const int nf = finer.points_per_axis()[a];
            const int m = idx[a] < n / 2 ? idx[a] : idx[a] - n;
            if (g.is_nyquist(a, idx[a]) && nf > n) {
                bins[a] = {nf + m, -m};
                count[a] = 2;
                weight[a] = 0.5;
            } else {
                bins[a] = {m >= 0 ? m : nf + m, 0};
                count[a] = 1;
                weight[a] = 1.0;
            }
        }
        const int combos = 1 << d;
        for (int mask = 0; mask < combos; ++mask) {
            std::size_t target = 0;
            double w = scale;
            bool ok = true;
            for (int a = 0; a < d; ++a) {
                const int pick = (mask >> a) & 1;
                if (pick >= count[a]) {
                    ok = false;
                    break;
                }
                target += stride[a] * static_cast<std::size_t>(bins[a][pick]);
                w *= weight[a];
            }
            if (ok) out[static_cast<Eigen::Index>(target)] += w * c[static_cast<Eigen::Index>(flat)];
        }
    }
    cached_spectral(finer)->backward(out);
    return WaveFunction(finer, std::move(out), f.eps());
}

} // namespace gwp
