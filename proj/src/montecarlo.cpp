#include "tvp/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tvp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-pair Gaussian stream: uniforms from a dedicated mt19937_64, mapped
// through the inverse normal cdf (keeps draws stdlib-independent).
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t pair) : eng_(splitmix64(seed ^ splitmix64(pair))) {}
    double next() {
        const std::uint64_t r = eng_();
        const double u = (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
        return math::norm_ppf(u);
    }

private:
    std::mt19937_64 eng_;
};

struct Coeffs {
    double drift_rho, drift_Y, drift_a;
    Vec2 vol_rho, vol_Y, vol_a;
};

Coeffs coeffs(const Market& mkt) {
    const MarketParams& p = mkt.params();
    const Vec2& xi = mkt.xi();
    Coeffs c;
    c.drift_rho = -(p.r0 + 0.5 * mkt.xi_norm_sq());
    c.vol_rho = {-xi[0], -xi[1]};
    const Vec2& sD = mkt.sigma_D();
    const Vec2& sL = mkt.sigma_L();
    c.drift_Y = p.mu_Y - 0.5 * p.sigma_Y * p.sigma_Y;
    c.vol_Y = sD;
    c.drift_a = p.mu_a - 0.5 * p.sigma_a * p.sigma_a;
    c.vol_a = sL;
    return c;
}

} // namespace

void SimConfig::validate() const {
    if (n_paths < 2) throw DomainError("sim.n_paths must be at least 2");
    if (n_steps < 1) throw DomainError("sim.n_steps must be at least 1");
    if (antithetic && n_paths % 2 != 0)
        throw DomainError("sim.n_paths must be even with antithetic sampling");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw DomainError("sim.t_grid must be strictly increasing");
}

PathSet simulate(const Market& mkt, const PensionParams& pen, const SimConfig& cfg) {
    cfg.validate();
    const double T = mkt.params().T;
    std::vector<double> grid = cfg.t_grid;
    if (grid.empty() || grid.back() < T) grid.push_back(T);
    if (!(grid.front() >= 0.0)) throw DomainError("sim.t_grid times must be nonnegative");
    if (grid.back() > T) throw DomainError("sim.t_grid times must not exceed T");

    // Step times: the uniform n_steps grid merged with the output times.
    std::vector<double> steps;
    steps.reserve(static_cast<std::size_t>(cfg.n_steps) + grid.size() + 1);
    for (int i = 0; i <= cfg.n_steps; ++i) steps.push_back(T * i / cfg.n_steps);
    steps.insert(steps.end(), grid.begin(), grid.end());
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                steps.end());
    std::vector<std::size_t> out_at(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        out_at[k] = static_cast<std::size_t>(
            std::lower_bound(steps.begin(), steps.end(), grid[k] - 1e-12) - steps.begin());

    const Coeffs c = coeffs(mkt);
    PathSet out;
    out.t_grid = grid;
    out.n_paths = cfg.n_paths;
    const std::size_t nt = grid.size();
    out.rho.resize(static_cast<std::size_t>(cfg.n_paths) * nt);
    out.salary.resize(out.rho.size());
    out.living.resize(out.rho.size());

    const std::int64_t pairs = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
    for (std::int64_t j = 0; j < pairs; ++j) {
        GaussianStream gs(cfg.seed, static_cast<std::uint64_t>(j));
        const int copies = cfg.antithetic ? 2 : 1;
        // one shared draw sequence per pair
        std::vector<double> draws(2 * (steps.size() - 1));
        for (double& d : draws) d = gs.next();
        for (int a = 0; a < copies; ++a) {
            const double sign = (a == 0) ? 1.0 : -1.0;
            const std::int64_t path = cfg.antithetic ? 2 * j + a : j;
            double lr = 0.0, ly = std::log(pen.y0), la = std::log(pen.a0);
            std::size_t next_out = 0;
            while (next_out < nt && out_at[next_out] == 0) {  // t = 0 outputs
                const std::size_t at = static_cast<std::size_t>(path) * nt + next_out;
                out.rho[at] = 1.0;
                out.salary[at] = pen.y0;
                out.living[at] = pen.a0;
                ++next_out;
            }
            for (std::size_t sidx = 1; sidx < steps.size(); ++sidx) {
                const double dt = steps[sidx] - steps[sidx - 1];
                const double sq = std::sqrt(dt);
                const double w1 = sign * draws[2 * (sidx - 1)] * sq;
                const double w2 = sign * draws[2 * (sidx - 1) + 1] * sq;
                lr += c.drift_rho * dt + c.vol_rho[0] * w1 + c.vol_rho[1] * w2;
                ly += c.drift_Y * dt + c.vol_Y[0] * w1 + c.vol_Y[1] * w2;
                la += c.drift_a * dt + c.vol_a[0] * w1 + c.vol_a[1] * w2;
                while (next_out < nt && out_at[next_out] == sidx) {
                    const std::size_t at = static_cast<std::size_t>(path) * nt + next_out;
                    out.rho[at] = std::exp(lr);
                    out.salary[at] = std::exp(ly);
                    out.living[at] = std::exp(la);
                    ++next_out;
                }
            }
        }
    }
    return out;
}

VerifyReport verify_solution(const PathSet& paths, const TerminalWealthMap& map, double alpha,
                             double z0, double kappa) {
    const std::size_t kT = paths.terminal_index();
    const std::int64_t n = paths.n_paths;
    std::vector<double> surplus(static_cast<std::size_t>(n));
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double rho = paths.state(paths.rho, i, kT);
        const double z = map(rho);
        surplus[static_cast<std::size_t>(i)] = z;
        const double v = rho * z;
        sum += v;
        sumsq += v * v;
    }
    VerifyReport rep;
    rep.budget_target = z0;
    rep.budget_estimate = sum / n;
    rep.budget_se = std::sqrt(std::max(sumsq / n - rep.budget_estimate * rep.budget_estimate, 0.0) /
                              (n - 1.0));
    rep.budget_ok = std::abs(rep.budget_estimate - z0) <= 3.0 * rep.budget_se;

    std::sort(surplus.begin(), surplus.end());
    const std::size_t m = static_cast<std::size_t>(
        std::ceil(alpha * static_cast<double>(n) - 1e-9));
    double tail = 0.0;
    for (std::size_t i = 0; i < m; ++i) tail += surplus[i];
    const double q_hat = surplus[m - 1];
    rep.tvar_estimate = tail / static_cast<double>(m);
    // influence function of the lower tail mean: (x - q)1{x<=q}/alpha + q - tvar
    double if2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = surplus[static_cast<std::size_t>(i)];
        const double inf_i = (x <= q_hat ? (x - q_hat) / alpha : 0.0) + q_hat - rep.tvar_estimate;
        if2 += inf_i * inf_i;
    }
    rep.tvar_se = std::sqrt(if2 / (static_cast<double>(n) - 1.0) / static_cast<double>(n));
    rep.tvar_target = kappa;
    rep.tvar_ok = std::abs(rep.tvar_estimate - kappa) <= 3.0 * rep.tvar_se;

    rep.min_surplus = surplus.front();
    rep.floor = map.ell;
    rep.floor_ok = rep.min_surplus >= map.ell;
    return rep;
}

HedgeReport replicate(const Market& mkt, const PensionParams& pen,
                      const TerminalWealthMap& map, const HedgePolicy& policy,
                      const std::vector<int>& ladder, std::int64_t n_paths,
                      std::uint64_t seed) {
    const MarketParams& p = mkt.params();
    const Vec2& xi = mkt.xi();
    const Coeffs c = coeffs(mkt);
    const double root = std::sqrt(1.0 - p.rho_IS * p.rho_IS);
    const double T = p.T;

    HedgeReport rep;
    for (int n_steps : ladder) {
        const double dt = T / n_steps;
        const double sq = std::sqrt(dt);
        double sse = 0.0;
        for (std::int64_t i = 0; i < n_paths; ++i) {
            GaussianStream gs(seed, static_cast<std::uint64_t>(i));
            double rho = 1.0, Y = pen.y0, a = pen.a0, X = pen.x0;
            for (int k = 0; k < n_steps; ++k) {
                const double t = k * dt;
                const PortfolioWeights w = policy(t, rho, Y, a);
                const double dW1 = gs.next() * sq;
                const double dW2 = gs.next() * sq;
                // sigma^T pi for sigma = [[sI,0],[sS rho,sS root]]
                const double sp1 = p.sigma_I * w.pi1 + p.sigma_S * p.rho_IS * w.pi2;
                const double sp2 = p.sigma_S * root * w.pi2;
                X += p.r0 * X * dt + sp1 * (xi[0] * dt + dW1) + sp2 * (xi[1] * dt + dW2) +
                     pen.c * Y * dt;
                rho *= std::exp(c.drift_rho * dt + c.vol_rho[0] * dW1 + c.vol_rho[1] * dW2);
                Y *= std::exp(c.drift_Y * dt + c.vol_Y[0] * dW1 + c.vol_Y[1] * dW2);
                a *= std::exp(c.drift_a * dt + c.vol_a[0] * dW1 + c.vol_a[1] * dW2);
            }
            const double target = map(rho) + mkt.annuity_L(T, a);
            const double err = X - target;
            sse += err * err;
        }
        rep.rungs.push_back({n_steps, std::sqrt(sse / static_cast<double>(n_paths))});
    }
    return rep;
}

Histogram surplus_density(const PathSet& paths, const TerminalWealthMap& map, int bins,
                          double lo, double hi) {
    if (!(bins > 0 && hi > lo)) throw DomainError("surplus_density: bad binning");
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
    std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
    const std::size_t kT = paths.terminal_index();
    for (std::int64_t i = 0; i < paths.n_paths; ++i) {
        const double z = map(paths.state(paths.rho, i, kT));
        int b = static_cast<int>((z - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        count[static_cast<std::size_t>(b)] += 1.0;
    }
    h.pdf.resize(count.size());
    const double width = (hi - lo) / bins;
    for (std::size_t b = 0; b < count.size(); ++b)
        h.pdf[b] = count[b] / (static_cast<double>(paths.n_paths) * width);
    h.mass_total = 1.0;
    return h;
}

MeanStrategyRow mean_strategy_at(const PathSet& paths, std::size_t t_index,
                                 const StrategyEngine& engine) {
    const double t = paths.t_grid[t_index];
    MeanStrategyRow row;
    row.t = t;
    const std::int64_t n = paths.n_paths;
    for (std::int64_t i = 0; i < n; ++i) {
        const double rho = paths.state(paths.rho, i, t_index);
        const double Y = paths.state(paths.salary, i, t_index);
        const double a = paths.state(paths.living, i, t_index);
        const PortfolioWeights w = engine.portfolio(t, rho, Y, a);
        const double X = w.pi1 + w.pi2 + w.cash;
        row.wealth += X;
        row.pi1 += w.pi1;
        row.pi2 += w.pi2;
        row.cash += w.cash;
        row.bond_prop += w.pi1 / X;
        row.stock_prop += w.pi2 / X;
    }
    const double dn = static_cast<double>(n);
    row.wealth /= dn;
    row.pi1 /= dn;
    row.pi2 /= dn;
    row.cash /= dn;
    row.bond_prop /= dn;
    row.stock_prop /= dn;
    return row;
}

} // namespace tvp
