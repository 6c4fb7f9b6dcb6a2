#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "gwp/operators.hpp"
#include "gwp/potentials.hpp"
#include "gwp/spectral.hpp"

namespace gwp {

struct SolverConfig {
    Grid grid;
    double dt = 1e-3;
    double t_end = 1.0;
    std::vector<double> snapshot_times; // sorted, within [0, t_end]
    bool refine = true;
    double observable_tol = 1e-10;
    int max_refinements = 6;
    double norm_drift_limit = 1e-9;

    void validate() const;
};

std::vector<double> uniform_times(double t_end, int intervals);

struct Snapshot {
    double t;
    WaveFunction psi;
};

/// Strang-split propagator exp(-iV dt/2eps) exp(-i eps|k|^2 dt/2) exp(-iV dt/2eps) for a fixed grid and step.
class StrangPropagator {
public:
    StrangPropagator(const Grid& grid, const PotentialModel& pot, double dt, double eps);
    void step(ComplexVector& psi) const;
    double dt() const { return dt_; }

private:
    Spectral spectral_;
    ComplexVector half_potential_;
    ComplexVector kinetic_;
    double dt_;
};

WaveFunction strang_step(const WaveFunction& psi, const PotentialModel& pot, double dt);

/// Snapshots at cfg.snapshot_times. Steps are shrunk per interval so every snapshot is hit exactly.
std::vector<Snapshot> propagate(const WaveFunction& psi0, const PotentialModel& pot, const SolverConfig& cfg);

using InitialState = std::function<WaveFunction(const Grid&)>;

/// Expectation values tracked by self_refine at one snapshot.
struct TrackedObservables {
    Eigen::VectorXd position;
    Eigen::VectorXd momentum;
    double energy = 0.0;
};
TrackedObservables track(const WaveFunction& psi, const PotentialModel& pot);

struct RefinedSolution {
    std::vector<Snapshot> snapshots;
    double achieved_tol = 0.0;
    int refinements = 0;
    Grid grid;
    double dt = 0.0;
};

/// Halves dt and doubles points per axis until all tracked expectation values change by less
/// than cfg.observable_tol between consecutive runs; returns the finer run.
RefinedSolution self_refine(const InitialState& init, const PotentialModel& pot, const SolverConfig& cfg);
/// Overload that resamples psi0 spectrally onto refined grids.
RefinedSolution self_refine(const WaveFunction& psi0, const PotentialModel& pot, const SolverConfig& cfg);

/// Binary snapshot file. Layout (little-endian, IEEE-754 doubles):
///   char[8] "GWPSNAP1"; uint32 dim; uint32 N[dim]; f64 center[dim]; f64 half_width[dim]; f64 eps;
///   uint64 count; then per snapshot: f64 t, then size() pairs (re, im) in grid storage order.
void write_snapshots_binary(std::ostream& os, const std::vector<Snapshot>& snaps);
std::vector<Snapshot> read_snapshots_binary(std::istream& is);
/// CSV: t, index, x1..xd, re, im
void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snaps);

} // namespace gwp
