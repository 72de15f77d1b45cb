#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tvp/strategy.hpp"

namespace tvp {

struct SimConfig {
    std::int64_t n_paths = 100000;
    int n_steps = 1;
    std::uint64_t seed = 1;
    bool antithetic = true;
    std::vector<double> t_grid;  // output times; empty -> {T}

    void validate() const;
};

/// Simulated joint states at the configured output times. Stream splitting:
/// path pair j draws from mt19937_64 seeded with splitmix64(seed, j), the odd
/// member of a pair negating the Gaussian increments, so a path's draws do
/// not depend on how paths are blocked.
struct PathSet {
    std::vector<double> t_grid;
    std::int64_t n_paths = 0;
    std::vector<double> rho, salary, living;  // path-major: [i * n_times + k]

    double state(const std::vector<double>& v, std::int64_t path, std::size_t k) const {
        return v[static_cast<std::size_t>(path) * t_grid.size() + k];
    }
    std::size_t terminal_index() const { return t_grid.size() - 1; }
};

/// Exact lognormal stepping for (rho, Y, a); the SDEs are geometric with
/// constant coefficients so there is no discretization bias at the grid.
PathSet simulate(const Market& mkt, const PensionParams& pen, const SimConfig& cfg);

struct VerifyReport {
    double budget_estimate = 0.0, budget_se = 0.0, budget_target = 0.0;
    double tvar_estimate = 0.0, tvar_se = 0.0, tvar_target = 0.0;
    double min_surplus = 0.0, floor = 0.0;
    bool budget_ok = false, tvar_ok = false, floor_ok = false;
};

/// Checks E[rho Z*(T)] = z0, the empirical tail-VaR of Z*(T) against kappa
/// (mean of the lowest ceil(alpha N) order statistics, influence-function
/// standard error) and the hard floor min Z*(T) >= ell; pass at 3 SE.
VerifyReport verify_solution(const PathSet& paths, const TerminalWealthMap& map, double alpha,
                             double z0, double kappa);

/// Hedge policy: dollar positions at (t, rho, Y, a).
using HedgePolicy = std::function<PortfolioWeights(double t, double rho, double Y, double a)>;

struct HedgeRung {
    int n_steps = 0;
    double rmse = 0.0;
};
struct HedgeReport {
    std::vector<HedgeRung> rungs;
};

/// Euler-Maruyama evolution of the wealth account under the policy against
/// exactly-stepped states; reports RMSE of X(T) - [Z*(rho(T)) + L(T)] for
/// each step count in the ladder. States are re-drawn per rung from the same
/// seed so rungs differ only in the wealth-account discretization... the
/// object whose error is being measured.
HedgeReport replicate(const Market& mkt, const PensionParams& pen,
                      const TerminalWealthMap& map, const HedgePolicy& policy,
                      const std::vector<int>& ladder, std::int64_t n_paths,
                      std::uint64_t seed);

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<double> pdf;    // density per bin (mass / width)
    double mass_total = 0.0;
};

/// Histogram of the terminal surplus Z*(rho(T)) over [lo, hi]; values outside
/// the range are clamped into the end bins so the masses sum to one.
Histogram surplus_density(const PathSet& paths, const TerminalWealthMap& map, int bins,
                          double lo, double hi);

struct MeanStrategyRow {
    double t = 0.0;
    double wealth = 0.0, pi1 = 0.0, pi2 = 0.0, cash = 0.0;
    double bond_prop = 0.0, stock_prop = 0.0;  // path means of pi/X
};

/// Path means of the optimal wealth and portfolio at one output time.
MeanStrategyRow mean_strategy_at(const PathSet& paths, std::size_t t_index,
                                 const StrategyEngine& engine);

} // namespace tvp
