#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

#include "esalloc/harness.hpp"

namespace esalloc {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& origin, const std::string& key) {
    throw std::runtime_error(origin + ": unknown config key '" + key + "'");
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& origin) {
    for (const auto& [key, _] : obj.items())
        if (allowed.find(key) == allowed.end()) bad_key(origin, key);
}

SimGarch parse_garch(const json& j, const std::string& origin) {
    check_keys(j, {"omega", "a", "b"}, origin + ".garch");
    SimGarch g;
    g.omega = j.value("omega", g.omega);
    g.a = j.value("a", g.a);
    g.b = j.value("b", g.b);
    return g;
}

SimConfig parse_sim(const json& j, const std::string& origin) {
    check_keys(j,
               {"kind", "d", "T", "rho", "garch", "names", "noise_scale",
                "phi_diag", "tau_scale", "psi_scale"},
               origin + ".sim");
    SimConfig sim;
    sim.kind = j.value("kind", sim.kind);
    sim.d = j.value("d", sim.d);
    sim.T = j.value("T", sim.T);
    sim.rho = j.value("rho", sim.rho);
    sim.noise_scale = j.value("noise_scale", sim.noise_scale);
    sim.phi_diag = j.value("phi_diag", sim.phi_diag);
    sim.tau_scale = j.value("tau_scale", sim.tau_scale);
    sim.psi_scale = j.value("psi_scale", sim.psi_scale);
    if (j.contains("names"))
        sim.names = j.at("names").get<std::vector<std::string>>();
    if (j.contains("garch")) {
        const json& g = j.at("garch");
        if (g.is_array())
            for (const auto& item : g) sim.garch.push_back(parse_garch(item, origin));
        else
            sim.garch.push_back(parse_garch(g, origin));
    }
    return sim;
}

ModelConfig parse_model(const json& j, const std::string& origin) {
    ModelConfig m;
    if (j.is_string()) {
        m.name = j.get<std::string>();
        return m;
    }
    if (!j.is_object())
        throw std::runtime_error(origin + ": model entries must be strings or objects");
    check_keys(j,
               {"name", "refit_stride", "ewma_lambda", "ewma_floor",
                "first_stage", "estimate_w1"},
               origin + ".models");
    if (!j.contains("name"))
        throw std::runtime_error(origin + ": model entry misses 'name'");
    m.name = j.at("name").get<std::string>();
    m.refit_stride = j.value("refit_stride", m.refit_stride);
    m.ewma_lambda = j.value("ewma_lambda", m.ewma_lambda);
    m.ewma_floor = j.value("ewma_floor", m.ewma_floor);
    m.first_stage = j.value("first_stage", m.first_stage);
    m.estimate_w1 = j.value("estimate_w1", m.estimate_w1);
    return m;
}

} // namespace

void RunConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::runtime_error("config: alpha must lie in (0,1)");
    if (n < 250) throw std::runtime_error("config: n must be at least 250");
    if (T_out < 1) throw std::runtime_error("config: T_out must be at least 1");
    if (!(epsilon > 0.0)) throw std::runtime_error("config: epsilon must be positive");
    if (!(level > 0.0 && level < 1.0))
        throw std::runtime_error("config: level must lie in (0,1)");
    const std::set<std::string> known = {"hs",     "elliptical", "cr_lse",
                                         "cr_opt", "const_w",    "truth"};
    for (const auto& m : models) {
        if (known.find(m.name) == known.end())
            throw std::runtime_error("config: unknown model '" + m.name + "'");
        if (m.refit_stride < 1)
            throw std::runtime_error("config: refit_stride must be at least 1");
        if (m.first_stage != "garch" && m.first_stage != "truth")
            throw std::runtime_error("config: first_stage must be garch or truth");
    }
}

RunConfig parse_run_config(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(origin + ": " + e.what());
    }
    check_keys(j,
               {"alpha", "n", "T_out", "models", "seed", "epsilon", "level",
                "benchmark", "sim"},
               origin);
    RunConfig cfg;
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.n = j.value("n", cfg.n);
    cfg.T_out = j.value("T_out", cfg.T_out);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.level = j.value("level", cfg.level);
    cfg.benchmark = j.value("benchmark", cfg.benchmark);
    if (j.contains("models"))
        for (const auto& item : j.at("models"))
            cfg.models.push_back(parse_model(item, origin));
    if (j.contains("sim")) cfg.sim = parse_sim(j.at("sim"), origin);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path);
}

} // namespace esalloc
