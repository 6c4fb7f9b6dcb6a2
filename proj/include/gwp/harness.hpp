#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gwp/config.hpp"
#include "gwp/reference_solver.hpp"

namespace gwp {

struct RunOptions {
    bool refine = true;
    int jobs = 1;
};

inline constexpr int kFlowCount = 2;
inline constexpr std::array<Flow, kFlowCount> kFlows{Flow::classical, Flow::corrected};
inline constexpr std::size_t flow_slot(Flow f) { return f == Flow::classical ? 0 : 1; }

/// Per-snapshot comparison of both parameter flows against the reference wave function.
struct CompareRow {
    double t = 0.0;
    Eigen::VectorXd exp_position;
    Eigen::VectorXd exp_momentum;
    double exp_energy = 0.0;
    std::array<Eigen::VectorXd, kFlowCount> pos_err;     // |q_i(t) - <x_i>(t)|
    std::array<Eigen::VectorXd, kFlowCount> mom_err;     // |p_i(t) - <p_i>(t)|
    std::array<double, kFlowCount> hamiltonian{};        // H^0 for classical, H^eps for corrected
    std::array<double, kFlowCount> gap{};                // <H> - hamiltonian, signed
    std::array<double, kFlowCount> wf_err{};             // ||psi - phi_0||
    // 2 Re<Z0, (x_i - q_i) phi0> and <Z0, (x_i - q_i) Z0>, signed; momentum analogues.
    std::array<Eigen::VectorXd, kFlowCount> term1_pos, term2_pos, term1_mom, term2_mom;
    std::array<Eigen::VectorXd, kFlowCount> signed_pos_err, signed_mom_err; // <z> - z(t)
};

struct CompareResult {
    double eps = 0.0;
    std::vector<CompareRow> rows;
    double achieved_tol = 0.0; // reference self-refinement tolerance
    int refinements = 0;
    Grid grid;
    double solver_dt = 0.0;
    std::array<Trajectory, kFlowCount> trajectories;
    std::array<double, kFlowCount> ode_dt{};
    std::array<double, kFlowCount> ode_error{}; // step-halving estimate of the flow discretization error
};

/// Evolves both flows and the reference from the same Gaussian and tabulates errors at each snapshot.
CompareResult run_compare(const ExperimentConfig& cfg, double eps, const RunOptions& opts = {});

void write_compare_csv(std::ostream& os, const CompareResult& res);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int used_points = 0;
    bool reliable = false;
};

inline constexpr double kFitFloor = 1e-13;
inline constexpr double kReliableR2 = 0.98;

/// Least squares on (ln eps, ln err), dropping err < floor. Throws InsufficientDataError below 3 points.
FitResult fit_slope(const std::vector<std::pair<double, double>>& points, double floor = kFitFloor);

/// Time series of the two error terms whose sum is <z_i> - z_i(t).
struct ErrorTermRow {
    double t = 0.0;
    Eigen::VectorXd term1_pos, term2_pos, total_pos;
    Eigen::VectorXd term1_mom, term2_mom, total_mom;
    double identity_residual = 0.0; // max |term1 + term2 - total|
};
std::vector<ErrorTermRow> first_error_term_diagnostic(const CompareResult& res, Flow flow);
std::vector<ErrorTermRow> first_error_term_diagnostic(const ExperimentConfig& cfg, double eps, Flow flow,
                                                      const RunOptions& opts = {});

struct Series {
    std::string name;
    std::vector<double> values; // one per eps
};

struct ConvergenceReport {
    int dim = 1;
    std::vector<double> eps;
    std::vector<Series> series;
    std::vector<std::pair<std::string, FitResult>> slopes;
    std::vector<std::string> unfit; // series without enough usable points
    std::vector<double> achieved_tol;
    std::vector<int> refinements;
    std::vector<int> points_per_axis;
    std::vector<double> solver_dt;
    std::array<std::vector<double>, kFlowCount> ode_dt;
    std::string config_hash;
    bool contaminated = false;

    const Series* find(const std::string& name) const;
    const FitResult* slope(const std::string& name) const;
};

/// Standard series names for dimension d.
std::vector<std::string> report_series_names(int dim);

/// Runs run_compare for every eps (in parallel over opts.jobs workers) and fits slopes.
ConvergenceReport epsilon_sweep(const ExperimentConfig& cfg, const RunOptions& opts = {});
/// Assembles a report from already computed comparisons (ordered by eps).
ConvergenceReport assemble_report(const ExperimentConfig& cfg, const std::vector<CompareResult>& results);

/// Writes config.json, errors.csv, slopes.csv and log-log SVG plots into dir.
/// A report without eps values yields header-only CSVs and no plots.
std::vector<std::filesystem::path> emit_report(const ConvergenceReport& report, const ExperimentConfig* cfg,
                                               const std::filesystem::path& dir);

void write_errors_csv(std::ostream& os, const ConvergenceReport& report);
void write_slopes_csv(std::ostream& os, const ConvergenceReport& report);

} // namespace gwp
