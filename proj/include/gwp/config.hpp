#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwp/grid.hpp"
#include "gwp/packet_dynamics.hpp"
#include "gwp/potentials.hpp"

namespace gwp {

struct InitialCondition {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
    ComplexMatrix Q;
    ComplexMatrix P;
    double S = 0.0;

    PacketParams at(double eps) const { return PacketParams::make(q, p, Q, P, S, eps); }
};

struct SolverSettings {
    double dt = 1e-3;
    bool refine = true;
    double observable_tol = 1e-10;
    int max_refinements = 6;
    int min_points = 8;
    double sigmas = 8.0;
    double points_per_period = 5.0;
    double momentum_sigmas = 8.0;
};

/// One experiment: potential, initial Gaussian, eps grid and numerical settings.
struct ExperimentConfig {
    nlohmann::json potential_spec;
    PotentialModel potential = PotentialModel::free(1);
    int dim = 1;
    InitialCondition initial;
    std::vector<double> eps_list;
    double t_end = 1.0;
    int snapshots = 20;
    IntegratorConfig integrator;
    SolverSettings solver;
    std::string output_dir = "out";
    std::string seed_label = "default";

    void validate() const;
};

PotentialModel potential_from_json(const nlohmann::json& spec, int dim);

/// Missing fields take defaults: Q = I, P = iI, S = 0, eps = 2^-4 .. 2^-9, t_end = 1.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Canonical form: every field explicit, keys sorted.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// SHA-256 of the canonical JSON dump, hex encoded.
std::string config_hash(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Torsional d = 1, q0 = 1, p0 = 0, Q0 = 1, P0 = i, eps in {2^-4 .. 2^-9}, t_end = 1.
ExperimentConfig default_torsional_config();

std::vector<double> geometric_eps(double first, double ratio, int count);

} // namespace gwp
