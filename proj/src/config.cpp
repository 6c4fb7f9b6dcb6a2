#include "gwp/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "gwp/errors.hpp"

namespace gwp {

using nlohmann::json;

namespace {

const cplx I(0.0, 1.0);

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError("config: " + where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ValidationError("config: unknown key '" + key + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

Eigen::VectorXd vector_of(const json& j, const std::string& what, int d) {
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        throw ValidationError("config: " + what + " must be an array of " + std::to_string(d) + " numbers");
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) {
        if (!j[i].is_number()) throw ValidationError("config: " + what + " entries must be numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd matrix_of(const json& j, const std::string& what, int d) {
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        throw ValidationError("config: " + what + " must be a " + std::to_string(d) + "x" + std::to_string(d) +
                              " array");
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i) m.row(i) = vector_of(j[i], what, d).transpose();
    return m;
}

ComplexMatrix complex_matrix_of(const json& j, const std::string& what, int d) {
    reject_unknown(j, {"re", "im"}, what);
    Eigen::MatrixXd re = j.contains("re") ? matrix_of(j["re"], what + ".re", d) : Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd im = j.contains("im") ? matrix_of(j["im"], what + ".im", d) : Eigen::MatrixXd::Zero(d, d);
    return re.cast<cplx>() + I * im.cast<cplx>();
}

json to_json_vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json to_json_mat(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json_vec(m.row(i).transpose()));
    return a;
}

json to_json_cmat(const ComplexMatrix& m) { return json{{"re", to_json_mat(m.real())}, {"im", to_json_mat(m.imag())}}; }

std::string scheme_name(Scheme s) { return s == Scheme::rk4 ? "rk4" : "stormer_verlet"; }

} // namespace

PotentialModel potential_from_json(const json& spec, int dim) {
    if (!spec.is_object() || !spec.contains("kind")) throw ValidationError("config: potential needs a 'kind'");
    const std::string kind = spec["kind"].get<std::string>();
    if (kind == "free") {
        reject_unknown(spec, {"kind"}, "potential");
        return PotentialModel::free(dim);
    }
    if (kind == "harmonic") {
        reject_unknown(spec, {"kind", "omega"}, "potential");
        Eigen::VectorXd omega = Eigen::VectorXd::Ones(dim);
        if (spec.contains("omega")) {
            if (spec["omega"].is_number())
                omega.setConstant(spec["omega"].get<double>());
            else
                omega = vector_of(spec["omega"], "potential.omega", dim);
        }
        return PotentialModel::harmonic(omega);
    }
    if (kind == "torsional") {
        reject_unknown(spec, {"kind"}, "potential");
        return PotentialModel::torsional(dim);
    }
    if (kind == "gaussian_well") {
        reject_unknown(spec, {"kind", "depth", "width"}, "potential");
        return PotentialModel::gaussian_well(dim, get_or(spec, "depth", 1.0), get_or(spec, "width", 1.0));
    }
    if (kind == "quartic") {
        reject_unknown(spec, {"kind", "coefficient"}, "potential");
        return PotentialModel::quartic(dim, get_or(spec, "coefficient", 1.0));
    }
    throw ValidationError("config: unknown potential kind '" + kind + "'");
}

namespace {

json canonical_potential(const PotentialModel& pot) {
    json j;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            j["kind"] = pot.name();
            if constexpr (std::is_same_v<K, HarmonicPotential>) j["omega"] = to_json_vec(k.omega);
            if constexpr (std::is_same_v<K, GaussianWellPotential>) {
                j["depth"] = k.depth;
                j["width"] = k.width;
            }
            if constexpr (std::is_same_v<K, QuarticPotential>) j["coefficient"] = k.coefficient;
        },
        pot.kind());
    return j;
}

} // namespace

void ExperimentConfig::validate() const {
    if (dim < 1 || dim > kMaxDim) throw ValidationError("config: dimension must be in 1..3");
    if (potential.dim() != dim) throw ValidationError("config: potential dimension differs from 'dimension'");
    if (initial.q.size() != dim || initial.p.size() != dim || initial.Q.rows() != dim || initial.P.rows() != dim)
        throw ValidationError("config: initial state has wrong dimension");
    if (eps_list.empty()) throw ValidationError("config: eps_list is empty");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0) || !std::isfinite(eps_list[k])) throw ValidationError("config: eps must be positive");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw ValidationError("config: eps_list must be strictly decreasing");
    }
    if (!(t_end > 0.0)) throw ValidationError("config: t_end must be positive");
    if (snapshots < 1) throw ValidationError("config: snapshots must be >= 1");
    if (!(solver.dt > 0.0) || solver.dt > t_end / snapshots + 1e-15)
        throw ValidationError("config: solver.dt must be positive and no larger than the snapshot spacing");
    if (solver.min_points < 8) throw ValidationError("config: solver.min_points must be >= 8");
    IntegratorConfig ic = integrator;
    ic.t_end = t_end;
    ic.snapshots = snapshots;
    ic.validate();
    initial.at(eps_list.front());
}

ExperimentConfig config_from_json(const json& j) {
    reject_unknown(j, {"dimension", "potential", "initial", "eps_list", "t_end", "snapshots", "integrator", "solver",
                       "output_dir", "seed_label"},
                   "config");
    ExperimentConfig cfg;
    cfg.dim = get_or(j, "dimension", 1);
    if (cfg.dim < 1 || cfg.dim > kMaxDim) throw ValidationError("config: dimension must be in 1..3");
    const int d = cfg.dim;

    cfg.potential = potential_from_json(j.value("potential", json{{"kind", "torsional"}}), d);
    cfg.potential_spec = canonical_potential(cfg.potential);

    const json init = j.value("initial", json::object());
    reject_unknown(init, {"q", "p", "Q", "P", "S"}, "initial");
    cfg.initial.q = init.contains("q") ? vector_of(init["q"], "initial.q", d) : Eigen::VectorXd::Zero(d);
    cfg.initial.p = init.contains("p") ? vector_of(init["p"], "initial.p", d) : Eigen::VectorXd::Zero(d);
    cfg.initial.Q = init.contains("Q") ? complex_matrix_of(init["Q"], "initial.Q", d) : ComplexMatrix::Identity(d, d);
    cfg.initial.P =
        init.contains("P") ? complex_matrix_of(init["P"], "initial.P", d) : ComplexMatrix(I * ComplexMatrix::Identity(d, d));
    cfg.initial.S = get_or(init, "S", 0.0);

    cfg.eps_list = j.contains("eps_list") ? get_or(j, "eps_list", std::vector<double>{}) : geometric_eps(1.0 / 16, 0.5, 6);
    cfg.t_end = get_or(j, "t_end", 1.0);
    cfg.snapshots = get_or(j, "snapshots", 20);

    const json ij = j.value("integrator", json::object());
    reject_unknown(ij, {"scheme", "dt", "refine_until"}, "integrator");
    const std::string scheme = get_or<std::string>(ij, "scheme", "stormer_verlet");
    if (scheme == "stormer_verlet")
        cfg.integrator.scheme = Scheme::stormer_verlet;
    else if (scheme == "rk4")
        cfg.integrator.scheme = Scheme::rk4;
    else
        throw ValidationError("config: unknown integrator scheme '" + scheme + "'");
    cfg.integrator.dt = get_or(ij, "dt", 1e-3);
    cfg.integrator.refine_until = get_or(ij, "refine_until", 1e-2);
    cfg.integrator.t_end = cfg.t_end;
    cfg.integrator.snapshots = cfg.snapshots;

    const json sj = j.value("solver", json::object());
    reject_unknown(sj, {"dt", "refine", "observable_tol", "max_refinements", "min_points", "sigmas",
                        "points_per_period", "momentum_sigmas"},
                   "solver");
    SolverSettings def;
    cfg.solver.dt = get_or(sj, "dt", def.dt);
    cfg.solver.refine = get_or(sj, "refine", def.refine);
    cfg.solver.observable_tol = get_or(sj, "observable_tol", def.observable_tol);
    cfg.solver.max_refinements = get_or(sj, "max_refinements", def.max_refinements);
    cfg.solver.min_points = get_or(sj, "min_points", def.min_points);
    cfg.solver.sigmas = get_or(sj, "sigmas", def.sigmas);
    cfg.solver.points_per_period = get_or(sj, "points_per_period", def.points_per_period);
    cfg.solver.momentum_sigmas = get_or(sj, "momentum_sigmas", def.momentum_sigmas);

    cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
    cfg.seed_label = get_or<std::string>(j, "seed_label", "default");
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["dimension"] = cfg.dim;
    j["potential"] = canonical_potential(cfg.potential);
    j["initial"] = json{{"q", to_json_vec(cfg.initial.q)},
                        {"p", to_json_vec(cfg.initial.p)},
                        {"Q", to_json_cmat(cfg.initial.Q)},
                        {"P", to_json_cmat(cfg.initial.P)},
                        {"S", cfg.initial.S}};
    j["eps_list"] = cfg.eps_list;
    j["t_end"] = cfg.t_end;
    j["snapshots"] = cfg.snapshots;
    j["integrator"] = json{{"scheme", scheme_name(cfg.integrator.scheme)},
                           {"dt", cfg.integrator.dt},
                           {"refine_until", cfg.integrator.refine_until}};
    j["solver"] = json{{"dt", cfg.solver.dt},
                       {"refine", cfg.solver.refine},
                       {"observable_tol", cfg.solver.observable_tol},
                       {"max_refinements", cfg.solver.max_refinements},
                       {"min_points", cfg.solver.min_points},
                       {"sigmas", cfg.solver.sigmas},
                       {"points_per_period", cfg.solver.points_per_period},
                       {"momentum_sigmas", cfg.solver.momentum_sigmas}};
    j["output_dir"] = cfg.output_dir;
    j["seed_label"] = cfg.seed_label;
    return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = config_to_json(cfg).dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("config_hash: SHA-256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("config: " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig default_torsional_config() {
    json j = {{"dimension", 1},
              {"potential", {{"kind", "torsional"}}},
              {"initial", {{"q", {1.0}}, {"p", {0.0}}}}};
    return config_from_json(j);
}

std::vector<double> geometric_eps(double first, double ratio, int count) {
    if (!(first > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1)
        throw ValidationError("geometric_eps: need first > 0, ratio in (0, 1), count >= 1");
    std::vector<double> v;
    double e = first;
    for (int k = 0; k < count; ++k, e *= ratio) v.push_back(e);
    return v;
}

} // namespace gwp
