#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "gwp/multi_index.hpp"
#include "gwp/operators.hpp"
#include "gwp/packet_dynamics.hpp"

namespace gwp {

inline constexpr double kResolutionErrorThreshold = 1e-8;

/// Grid sized by size_grid for a packet frozen at params, resolving excitations up to max_order.
Grid grid_for_packet(const PacketParams& params, int max_order, GridSizing rule = {});

/// The Gaussian phi_0(q,p,Q,P,S; x) sampled on the grid, using params.branch for (det Q)^{-1/2}.
/// Throws ResolutionError if the packet is not resolved on the grid.
WaveFunction eval_phi0(const PacketParams& params, const Grid& grid);
/// As eval_phi0 without the resolution check.
WaveFunction eval_phi0_unchecked(const PacketParams& params, const Grid& grid);

/// Components j = 1..d of the lowering operator A applied to f.
std::vector<WaveFunction> apply_lowering(const PacketParams& params, const WaveFunction& f,
                                         Diagnostics* diag = nullptr);
/// Components j = 1..d of the raising operator A^* applied to f.
std::vector<WaveFunction> apply_raising(const PacketParams& params, const WaveFunction& f,
                                        Diagnostics* diag = nullptr);
WaveFunction apply_lowering(const PacketParams& params, const WaveFunction& f, int j, Diagnostics* diag = nullptr);
WaveFunction apply_raising(const PacketParams& params, const WaveFunction& f, int j, Diagnostics* diag = nullptr);

/// Hagedorn wave packets phi_n for all |n| <= max_order on one grid.
class BasisSet {
public:
    BasisSet(PacketParams params, Grid grid, int max_order);

    const PacketParams& params() const { return params_; }
    const Grid& grid() const { return grid_; }
    int max_order() const { return max_order_; }
    std::size_t size() const { return functions_.size(); }

    bool contains(const MultiIndex& n) const { return functions_.count(n) > 0; }
    /// Throws std::out_of_range for a missing index.
    const WaveFunction& operator[](const MultiIndex& n) const;
    void insert(const MultiIndex& n, WaveFunction f);
    /// Indices in breadth-first order.
    std::vector<MultiIndex> indices() const;

    /// max |<phi_m, phi_n> - delta_mn|
    double gram_deviation() const;

    /// phi_{n+e_j} = (n_j + 1)^{-1/2} A^*_j phi_n; throws ValidationError when phi_n is missing.
    WaveFunction raised(const MultiIndex& n, int j) const;
    /// As raised(), storing the result (replacing any existing entry).
    const WaveFunction& raise_index(const MultiIndex& n, int j);

private:
    PacketParams params_;
    Grid grid_;
    int max_order_;
    std::map<MultiIndex, WaveFunction> functions_;
};

/// Spectral construction by repeated raising.
BasisSet build_basis(const PacketParams& params, int max_order, const Grid& grid);
/// Algebraic three-term recurrence Q (sqrt(n_j+1) phi_{n+e_j})_j = sqrt(2/eps)(x-q) phi_n - conj(Q) (sqrt(n_j) phi_{n-e_j})_j
BasisSet ladder_recurrence_eval(const PacketParams& params, int max_order, const Grid& grid);

/// Largest pointwise difference between two bases over all shared indices.
double max_basis_difference(const BasisSet& a, const BasisSet& b);

/// Long-format CSV: n, x1..xd, re, im.
void write_basis_csv(std::ostream& os, const BasisSet& basis);

} // namespace gwp
