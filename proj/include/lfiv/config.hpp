#ifndef LFIV_CONFIG_HPP
#define LFIV_CONFIG_HPP

// Run configuration for the command-line front end. JSON on disk; every
// object is checked against its key set and unknown keys are rejected.

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lfiv/csv.hpp"
#include "lfiv/data.hpp"
#include "lfiv/montecarlo.hpp"

namespace lfiv {

using json = nlohmann::json;

struct DataSection {
    std::string path;
    std::optional<ColumnRoles> columns;  // inferred from header prefixes when absent
};

struct SimulateSection {
    Index n = 200;
    double beta0 = 1.0;
};

struct McPhiSection {
    int replications = 1000;
    Index n = 200;
    std::vector<double> multipliers{0.5, 1.0, 2.0};
};

struct McBetaSection {
    int replications = 10000;
    Index n = 200;
    std::vector<double> multipliers{1.0, 2.0};
    std::vector<double> beta_null_grid{0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4};
    std::vector<double> levels{0.05, 0.10};
    double power_level = 0.05;
};

struct TestSection {
    std::vector<double> beta_null{1.0};
    int bootstrap = 399;
};

struct RunConfig {
    DataSection data;
    KernelSpec kernel;
    MeasureSpec measure;
    LFConfig lf_phi;
    LFConfig lf_beta;
    std::optional<GridSpec> grid;
    SimulateSection simulate;
    McPhiSection mc_phi;
    McBetaSection mc_beta;
    TestSection test;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string output_dir = "out";
    bool dump_gram = false;
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline LFConfig lf_from_json(const json& j, const std::string& where) {
    check_keys(j, {"step_a", "max_m", "fixed_m", "penalty_exponent", "m_multiplier", "fit_scale_exponent"}, where);
    LFConfig c;
    read_opt(j, "step_a", c.step_a);
    read_opt(j, "max_m", c.max_m);
    read_opt(j, "fixed_m", c.fixed_m);
    read_opt(j, "penalty_exponent", c.penalty_exponent);
    read(j, "m_multiplier", c.m_multiplier);
    read(j, "fit_scale_exponent", c.fit_scale_exponent);
    if (c.step_a && !(*c.step_a > 0.0)) throw ConfigError(where + ".step_a must be positive");
    if (c.max_m && *c.max_m < 1) throw ConfigError(where + ".max_m must be >= 1");
    if (c.fixed_m && (*c.fixed_m < 0 || (c.max_m && *c.fixed_m > *c.max_m)))
        throw ConfigError(where + ".fixed_m must lie in [0, max_m]");
    if (!(c.m_multiplier > 0.0)) throw ConfigError(where + ".m_multiplier must be positive");
    return c;
}

template <typename T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json lf_to_json(const LFConfig& c) {
    return {{"step_a", opt_json(c.step_a)},
            {"max_m", opt_json(c.max_m)},
            {"fixed_m", opt_json(c.fixed_m)},
            {"penalty_exponent", opt_json(c.penalty_exponent)},
            {"m_multiplier", c.m_multiplier},
            {"fit_scale_exponent", c.fit_scale_exponent}};
}

inline std::vector<double> eigen_to_vector(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

} // namespace detail

/// Parses a run configuration. Missing keys keep their defaults.
inline RunConfig config_from_json(const json& j) {
    using namespace detail;
    try {
        check_keys(j,
                   {"data", "kernel", "measure", "lf_phi", "lf_beta", "grid", "simulate", "mc_phi", "mc_beta", "test",
                    "seed", "threads", "output_dir", "dump_gram"},
                   "config");
        RunConfig c;
        if (j.contains("data")) {
            const json& d = j.at("data");
            check_keys(d, {"path", "columns"}, "data");
            read(d, "path", c.data.path);
            if (d.contains("columns") && !d.at("columns").is_null()) {
                const json& cols = d.at("columns");
                check_keys(cols, {"y", "x", "z", "w"}, "data.columns");
                ColumnRoles r;
                r.y = cols.at("y").get<std::string>();
                read(cols, "x", r.x);
                read(cols, "z", r.z);
                read(cols, "w", r.w);
                c.data.columns = r;
            }
        }
        if (j.contains("kernel")) {
            const json& k = j.at("kernel");
            check_keys(k, {"family", "order", "bandwidth"}, "kernel");
            if (k.contains("family") && k.at("family").get<std::string>() != "gaussian_product")
                throw ConfigError("kernel.family must be gaussian_product");
            read(k, "order", c.kernel.order);
            read_opt(k, "bandwidth", c.kernel.bandwidth);
            if (c.kernel.order < 1) throw ConfigError("kernel.order must be positive");
            if (c.kernel.bandwidth && !(*c.kernel.bandwidth > 0.0))
                throw ConfigError("kernel.bandwidth must be positive");
        }
        if (j.contains("measure")) {
            const json& m = j.at("measure");
            check_keys(m, {"charfn", "pi_mean", "pi_variance", "pi_variance_factor"}, "measure");
            if (m.contains("charfn") && m.at("charfn").get<std::string>() != "gaussian_standard")
                throw ConfigError("measure.charfn must be gaussian_standard");
            if (m.contains("pi_mean") && !m.at("pi_mean").is_null()) {
                const auto v = m.at("pi_mean").get<std::vector<double>>();
                c.measure.pi_mean = Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
            }
            read_opt(m, "pi_variance", c.measure.pi_variance);
            read(m, "pi_variance_factor", c.measure.pi_variance_factor);
            if (c.measure.pi_variance && !(*c.measure.pi_variance > 0.0))
                throw ConfigError("measure.pi_variance must be positive");
            if (!(c.measure.pi_variance_factor > 0.0)) throw ConfigError("measure.pi_variance_factor must be positive");
        }
        if (j.contains("lf_phi")) c.lf_phi = lf_from_json(j.at("lf_phi"), "lf_phi");
        if (j.contains("lf_beta")) c.lf_beta = lf_from_json(j.at("lf_beta"), "lf_beta");
        if (j.contains("grid") && !j.at("grid").is_null()) {
            const json& g = j.at("grid");
            check_keys(g, {"lo", "hi", "points"}, "grid");
            GridSpec gs;
            read(g, "lo", gs.lo);
            read(g, "hi", gs.hi);
            read(g, "points", gs.points);
            if (!(gs.hi > gs.lo) || gs.points < 1) throw ConfigError("grid needs lo < hi and points >= 1");
            c.grid = gs;
        }
        if (j.contains("simulate")) {
            const json& s = j.at("simulate");
            check_keys(s, {"n", "beta0"}, "simulate");
            read(s, "n", c.simulate.n);
            read(s, "beta0", c.simulate.beta0);
        }
        if (j.contains("mc_phi")) {
            const json& s = j.at("mc_phi");
            check_keys(s, {"replications", "n", "multipliers"}, "mc_phi");
            read(s, "replications", c.mc_phi.replications);
            read(s, "n", c.mc_phi.n);
            read(s, "multipliers", c.mc_phi.multipliers);
        }
        if (j.contains("mc_beta")) {
            const json& s = j.at("mc_beta");
            check_keys(s, {"replications", "n", "multipliers", "beta_null_grid", "levels", "power_level"}, "mc_beta");
            read(s, "replications", c.mc_beta.replications);
            read(s, "n", c.mc_beta.n);
            read(s, "multipliers", c.mc_beta.multipliers);
            read(s, "beta_null_grid", c.mc_beta.beta_null_grid);
            read(s, "levels", c.mc_beta.levels);
            read(s, "power_level", c.mc_beta.power_level);
        }
        if (j.contains("test")) {
            const json& s = j.at("test");
            check_keys(s, {"beta_null", "bootstrap"}, "test");
            read(s, "beta_null", c.test.beta_null);
            read(s, "bootstrap", c.test.bootstrap);
            if (c.test.bootstrap < 1) throw ConfigError("test.bootstrap must be >= 1");
        }
        read(j, "seed", c.seed);
        read(j, "threads", c.threads);
        read(j, "output_dir", c.output_dir);
        read(j, "dump_gram", c.dump_gram);
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

inline json config_to_json(const RunConfig& c) {
    using namespace detail;
    json data = {{"path", c.data.path}, {"columns", nullptr}};
    if (c.data.columns)
        data["columns"] = {{"y", c.data.columns->y}, {"x", c.data.columns->x}, {"z", c.data.columns->z},
                           {"w", c.data.columns->w}};
    json measure = {{"charfn", "gaussian_standard"},
                    {"pi_mean", c.measure.pi_mean ? json(eigen_to_vector(*c.measure.pi_mean)) : json(nullptr)},
                    {"pi_variance", opt_json(c.measure.pi_variance)},
                    {"pi_variance_factor", c.measure.pi_variance_factor}};
    json grid = c.grid ? json{{"lo", c.grid->lo}, {"hi", c.grid->hi}, {"points", c.grid->points}} : json(nullptr);
    return {{"data", data},
            {"kernel", {{"family", "gaussian_product"}, {"order", c.kernel.order}, {"bandwidth", opt_json(c.kernel.bandwidth)}}},
            {"measure", measure},
            {"lf_phi", lf_to_json(c.lf_phi)},
            {"lf_beta", lf_to_json(c.lf_beta)},
            {"grid", grid},
            {"simulate", {{"n", c.simulate.n}, {"beta0", c.simulate.beta0}}},
            {"mc_phi", {{"replications", c.mc_phi.replications}, {"n", c.mc_phi.n}, {"multipliers", c.mc_phi.multipliers}}},
            {"mc_beta",
             {{"replications", c.mc_beta.replications},
              {"n", c.mc_beta.n},
              {"multipliers", c.mc_beta.multipliers},
              {"beta_null_grid", c.mc_beta.beta_null_grid},
              {"levels", c.mc_beta.levels},
              {"power_level", c.mc_beta.power_level}}},
            {"test", {{"beta_null", c.test.beta_null}, {"bootstrap", c.test.bootstrap}}},
            {"seed", c.seed},
            {"threads", c.threads},
            {"output_dir", c.output_dir},
            {"dump_gram", c.dump_gram}};
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

} // namespace lfiv

#endif
