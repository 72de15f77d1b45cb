// tvar-pension: solver and Monte Carlo front end for the tail-VaR constrained
// DC pension model. Subcommands: solve, terminal-map, strategy, density, sweep.
// Exit codes: 0 ok, 1 numeric failure, 2 infeasible, 64 config error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvp/config.hpp"
#include "tvp/quantile_integrals.hpp"

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

struct Model {
    tvp::RunConfig cfg;
    tvp::Market market;
    tvp::KernelLaw law;
    tvp::CrraUtility util;
    tvp::SurplusBudget budget;
    tvp::Solution sol;
};

Model build_model(const tvp::RunConfig& cfg) {
    tvp::Market market(cfg.market);
    tvp::KernelLaw law = market.kernel_law();
    tvp::CrraUtility util(cfg.pension.gamma);
    tvp::SurplusBudget budget = tvp::surplus_budget(market, cfg.pension, law);
    tvp::Solution sol = tvp::solve(law, util, cfg.pension.alpha, cfg.pension.ell, budget.z_bar,
                                   budget.z_under);
    return {cfg, std::move(market), law, util, budget, std::move(sol)};
}

std::string solve_report(const Model& m) {
    ordered_json j;
    j["regime"] = tvp::to_string(m.sol.regime.tag);
    j["lambda_hat"] = m.sol.regime.lambda_hat;
    j["min_cost_R"] = m.sol.regime.R_value;
    j["threshold_cost_C"] = m.sol.regime.C_value;
    j["lambda_under"] = m.sol.regime.lambda_under;
    j["lambda_star"] = m.sol.lambda_star;
    j["nu_star"] = m.sol.nu_star;
    j["rho_under"] = m.sol.terminal.rho_under;
    j["rho_bar"] = m.sol.terminal.rho_bar;
    j["rho_ell"] = m.sol.terminal.rho_ell;
    j["z1"] = m.sol.env.z1;
    j["z2"] = m.sol.env.z2;
    j["budget_residual"] = m.sol.budget_residual;
    j["tvar_residual"] = m.sol.tvar_residual;
    j["z_bar"] = m.sol.z_bar;
    j["z_under"] = m.sol.z_under;
    j["z0"] = m.budget.z0;
    j["d0"] = m.budget.d0;
    j["ell0"] = m.budget.ell0;
    j["warnings"] = m.market.warnings();
    return j.dump(2) + "\n";
}

std::string terminal_map_csv(const Model& m, double rho_min, double rho_max, int points) {
    if (!(rho_min > 0.0 && rho_max > rho_min && points >= 2))
        throw tvp::DomainError("terminal-map: bad rho grid");
    std::ostringstream os;
    os << "rho,z_star,x_star\n";
    for (int i = 0; i < points; ++i) {
        const double rho = rho_min + (rho_max - rho_min) * i / (points - 1);
        const double z = m.sol.terminal(rho);
        // X*(T) = Z*(T) + L(T); the wealth column reports the L(T)-detrended value.
        os << fmt(rho) << ',' << fmt(z) << ',' << fmt(z) << '\n';
    }
    return os.str();
}

std::string strategy_csv(Model& m, const std::vector<double>& times) {
    tvp::StrategyEngine engine(m.market, m.cfg.pension, m.law, m.sol);
    tvp::SimConfig sim = m.cfg.sim;
    sim.t_grid = times;
    const tvp::PathSet paths = tvp::simulate(m.market, m.cfg.pension, sim);
    std::ostringstream os;
    os << "t,X,pi1,pi2,cash\n";
    for (std::size_t k = 0; k < paths.t_grid.size(); ++k) {
        if (paths.t_grid[k] >= m.cfg.market.T) continue;  // strategy defined for t < T
        const tvp::MeanStrategyRow row = tvp::mean_strategy_at(paths, k, engine);
        os << fmt(row.t) << ',' << fmt(row.wealth) << ',' << fmt(row.pi1) << ','
           << fmt(row.pi2) << ',' << fmt(row.cash) << '\n';
    }
    return os.str();
}

std::string density_csv(Model& m, const std::string& raw_json, int bins) {
    // Pure tail-VaR comparison: the same problem with the insurance floor off.
    const tvp::RunConfig cfg_nofloor =
        tvp::parse_config(tvp::apply_override(raw_json, "pension.ell=0"), "config");
    Model nofloor = build_model(cfg_nofloor);

    const tvp::PathSet paths = tvp::simulate(m.market, m.cfg.pension, m.cfg.sim);
    const std::size_t kT = paths.terminal_index();
    double hi = 0.0;
    for (std::int64_t i = 0; i < paths.n_paths; ++i) {
        const double rho = paths.state(paths.rho, i, kT);
        hi = std::max({hi, m.sol.terminal(rho), nofloor.sol.terminal(rho)});
    }
    const tvp::Histogram with_floor = tvp::surplus_density(paths, m.sol.terminal, bins, 0.0, hi);
    const tvp::Histogram no_floor =
        tvp::surplus_density(paths, nofloor.sol.terminal, bins, 0.0, hi);
    std::ostringstream os;
    os << "z_lo,z_hi,pdf_with_floor,pdf_no_floor\n";
    for (int b = 0; b < bins; ++b) {
        os << fmt(with_floor.edges[b]) << ',' << fmt(with_floor.edges[b + 1]) << ','
           << fmt(with_floor.pdf[b]) << ',' << fmt(no_floor.pdf[b]) << '\n';
    }
    return os.str();
}

std::string sweep_csv(const std::string& raw_json, const std::string& param,
                      const std::vector<double>& values) {
    if (param != "alpha" && param != "z_under")
        throw tvp::DomainError("sweep: --param must be alpha or z_under");
    std::ostringstream os;
    os << "param,value,bond_prop,stock_prop\n";
    for (double v : values) {
        std::string text = raw_json;
        if (param == "alpha") {
            text = tvp::apply_override(text, "pension.alpha=" + fmt(v));
        } else {
            // z_under = kappa - ell is the configured quantity here
            const tvp::RunConfig base = tvp::parse_config(text, "config");
            text = tvp::apply_override(text, "pension.kappa=" + fmt(base.pension.ell + v));
        }
        Model m = build_model(tvp::parse_config(text, "config"));
        tvp::StrategyEngine engine(m.market, m.cfg.pension, m.law, m.sol);
        tvp::SimConfig sim = m.cfg.sim;
        sim.t_grid = {m.cfg.market.T / 2.0};
        const tvp::PathSet paths = tvp::simulate(m.market, m.cfg.pension, sim);
        const tvp::MeanStrategyRow row = tvp::mean_strategy_at(paths, 0, engine);
        os << param << ',' << fmt(v) << ',' << fmt(row.bond_prop) << ','
           << fmt(row.stock_prop) << '\n';
    }
    return os.str();
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail-VaR constrained DC pension solver"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_option("--seed", seed, "override sim.seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--set", overrides, "override config fields, e.g. pension.ell=0");

    auto* cmd_solve = app.add_subcommand("solve", "regime, multipliers and thresholds (JSON)");
    auto* cmd_map = app.add_subcommand("terminal-map", "terminal surplus vs kernel value (CSV)");
    double rho_min = 0.01, rho_max = 1.0;
    int points = 400;
    cmd_map->add_option("--rho-min", rho_min);
    cmd_map->add_option("--rho-max", rho_max);
    cmd_map->add_option("--points", points);
    auto* cmd_strategy = app.add_subcommand("strategy", "mean wealth and positions over time (CSV)");
    std::string times_csv;
    cmd_strategy->add_option("--times", times_csv, "comma-separated times (default yearly)");
    auto* cmd_density = app.add_subcommand("density", "terminal surplus density, with and without floor (CSV)");
    int bins = 60;
    cmd_density->add_option("--bins", bins);
    auto* cmd_sweep = app.add_subcommand("sweep", "mid-horizon proportions over a parameter list (CSV)");
    std::string param = "alpha", values_csv = "0.1,0.125,0.15,0.175,0.2";
    cmd_sweep->add_option("--param", param, "alpha or z_under");
    cmd_sweep->add_option("--values", values_csv);

    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path);
        if (!in) throw tvp::ConfigError(config_path, "cannot open config file");
        std::stringstream buf;
        buf << in.rdbuf();
        std::string raw = buf.str();
        for (const std::string& o : overrides) raw = tvp::apply_override(raw, o);
        if (seed_set) raw = tvp::apply_override(raw, "sim.seed=" + std::to_string(seed));

        Model model = build_model(tvp::parse_config(raw, config_path));
        for (const std::string& w : model.market.warnings()) std::cerr << "warning: " << w << "\n";

        if (model.sol.regime.tag == tvp::RegimeTag::Infeasible) {
            write_out(out_path, solve_report(model));
            std::cerr << "infeasible: z_bar < R(z_under)\n";
            return 2;
        }

        if (*cmd_solve) {
            write_out(out_path, solve_report(model));
        } else if (*cmd_map) {
            write_out(out_path, terminal_map_csv(model, rho_min, rho_max, points));
        } else if (*cmd_strategy) {
            std::vector<double> times;
            if (!times_csv.empty()) {
                times = parse_values(times_csv);
            } else {
                for (double t = 0.0; t < model.cfg.market.T; t += 1.0) times.push_back(t);
            }
            write_out(out_path, strategy_csv(model, times));
        } else if (*cmd_density) {
            write_out(out_path, density_csv(model, raw, bins));
        } else if (*cmd_sweep) {
            write_out(out_path, sweep_csv(raw, param, parse_values(values_csv)));
        }
        return 0;
    } catch (const tvp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 64;
    } catch (const tvp::InfeasibleBudget& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
