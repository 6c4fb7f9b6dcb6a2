#include "gwp/wave_function.hpp"

#include "gwp/errors.hpp"

namespace gwp {

WaveFunction::WaveFunction(Grid grid, double eps)
    : grid_(std::move(grid)), values_(ComplexVector::Zero(static_cast<Eigen::Index>(grid_.size()))), eps_(eps) {
    if (!(eps_ > 0.0)) throw ValidationError("wave function: eps must be positive");
}

WaveFunction::WaveFunction(Grid grid, ComplexVector values, double eps)
    : grid_(std::move(grid)), values_(std::move(values)), eps_(eps) {
    if (!(eps_ > 0.0)) throw ValidationError("wave function: eps must be positive");
    if (static_cast<std::size_t>(values_.size()) != grid_.size())
        throw ValidationError("wave function: " + std::to_string(values_.size()) + " values for " +
                              grid_.describe());
}

WaveFunction WaveFunction::with_values(ComplexVector values) const { return WaveFunction(grid_, std::move(values), eps_); }

bool WaveFunction::compatible(const WaveFunction& o) const { return eps_ == o.eps_ && grid_ == o.grid_; }

WaveFunction& WaveFunction::operator+=(const WaveFunction& o) {
    require_compatible(*this, o, "operator+=");
    values_ += o.values_;
    return *this;
}

WaveFunction& WaveFunction::operator-=(const WaveFunction& o) {
    require_compatible(*this, o, "operator-=");
    values_ -= o.values_;
    return *this;
}

WaveFunction& WaveFunction::operator*=(cplx c) {
    values_ *= c;
    return *this;
}

bool WaveFunction::all_finite() const { return values_.allFinite(); }

void require_compatible(const WaveFunction& a, const WaveFunction& b, const char* context) {
    if (a.grid() != b.grid())
        throw GridMismatchError(std::string(context) + ": grid mismatch between " + a.grid().describe() + " and " +
                                b.grid().describe());
    if (a.eps() != b.eps())
        throw GridMismatchError(std::string(context) + ": eps mismatch " + std::to_string(a.eps()) + " vs " +
                                std::to_string(b.eps()));
}

} // namespace gwp
