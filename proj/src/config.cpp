#include "tvp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tvp {

namespace {

using nlohmann::json;

double get_num(const json& obj, const std::string& section, const std::string& key,
               bool required = true, double fallback = 0.0) {
    if (!obj.contains(key)) {
        if (required) throw ConfigError(section + "." + key, "missing required field");
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(section + "." + key, "expected a number");
    return v.get<double>();
}

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError(section + "." + key, "unknown field");
}

MarketParams parse_market(const json& j) {
    if (!j.is_object()) throw ConfigError("market", "expected an object");
    check_keys(j, "market",
               {"r", "r0", "mu_I", "sigma_I", "mu_S", "sigma_S", "rho_IS", "mu_Y", "sigma_Y",
                "rho_IY", "mu_a", "sigma_a", "rho_Ia", "T", "Tprime", "xi_override"});
    MarketParams m;
    m.r = get_num(j, "market", "r");
    m.r0 = get_num(j, "market", "r0");
    m.mu_I = get_num(j, "market", "mu_I");
    m.sigma_I = get_num(j, "market", "sigma_I");
    m.mu_S = get_num(j, "market", "mu_S");
    m.sigma_S = get_num(j, "market", "sigma_S");
    m.rho_IS = get_num(j, "market", "rho_IS");
    m.mu_Y = get_num(j, "market", "mu_Y");
    m.sigma_Y = get_num(j, "market", "sigma_Y");
    m.rho_IY = get_num(j, "market", "rho_IY");
    m.mu_a = get_num(j, "market", "mu_a");
    m.sigma_a = get_num(j, "market", "sigma_a");
    m.rho_Ia = get_num(j, "market", "rho_Ia");
    m.T = get_num(j, "market", "T");
    m.Tprime = get_num(j, "market", "Tprime");
    if (j.contains("xi_override")) {
        const json& xo = j.at("xi_override");
        if (!xo.is_array() || xo.size() != 2 || !xo[0].is_number() || !xo[1].is_number())
            throw ConfigError("market.xi_override", "expected a pair of numbers");
        m.xi_override = Vec2{xo[0].get<double>(), xo[1].get<double>()};
    }
    return m;
}

PensionParams parse_pension(const json& j) {
    if (!j.is_object()) throw ConfigError("pension", "expected an object");
    check_keys(j, "pension", {"c", "y0", "a0", "x0", "ell", "kappa", "alpha", "gamma"});
    PensionParams p;
    p.c = get_num(j, "pension", "c");
    p.y0 = get_num(j, "pension", "y0");
    p.a0 = get_num(j, "pension", "a0");
    p.x0 = get_num(j, "pension", "x0");
    p.ell = get_num(j, "pension", "ell");
    p.kappa = get_num(j, "pension", "kappa");
    p.alpha = get_num(j, "pension", "alpha");
    p.gamma = get_num(j, "pension", "gamma");
    return p;
}

SimConfig parse_sim(const json& j) {
    if (!j.is_object()) throw ConfigError("sim", "expected an object");
    check_keys(j, "sim", {"n_paths", "n_steps", "seed", "antithetic", "t_grid"});
    SimConfig s;
    s.n_paths = static_cast<std::int64_t>(get_num(j, "sim", "n_paths", false, 100000));
    s.n_steps = static_cast<int>(get_num(j, "sim", "n_steps", false, 1));
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            throw ConfigError("sim.seed", "expected an integer");
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("antithetic")) {
        if (!j.at("antithetic").is_boolean()) throw ConfigError("sim.antithetic", "expected a bool");
        s.antithetic = j.at("antithetic").get<bool>();
    }
    if (j.contains("t_grid")) {
        if (!j.at("t_grid").is_array()) throw ConfigError("sim.t_grid", "expected an array");
        for (const auto& v : j.at("t_grid")) {
            if (!v.is_number()) throw ConfigError("sim.t_grid", "expected numbers");
            s.t_grid.push_back(v.get<double>());
        }
    }
    return s;
}

} // namespace

RunConfig parse_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin, e.what());
    }
    if (!root.is_object()) throw ConfigError(origin, "top level must be an object");
    check_keys(root, origin, {"market", "pension", "sim"});
    if (!root.contains("market")) throw ConfigError("market", "missing section");
    if (!root.contains("pension")) throw ConfigError("pension", "missing section");
    RunConfig cfg;
    cfg.market = parse_market(root.at("market"));
    cfg.pension = parse_pension(root.at("pension"));
    if (root.contains("sim")) cfg.sim = parse_sim(root.at("sim"));
    try {
        cfg.market.validate();
        cfg.pension.validate();
        cfg.sim.validate();
    } catch (const std::exception& e) {
        throw ConfigError(origin, e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string apply_override(const std::string& json_text, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError(assignment, "override must look like section.key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", e.what());
    }
    json* node = &root;
    std::size_t start = 0;
    std::vector<std::string> parts;
    while (true) {
        const auto dot = path.find('.', start);
        parts.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = value;  // plain string
    }
    (*node)[parts.back()] = parsed;
    return root.dump();
}

} // namespace tvp
