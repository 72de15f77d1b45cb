#include "tvp/strategy.hpp"

#include <cmath>

namespace tvp {

namespace {

// Minimum conditional std dev of ln rho(T), in units of the band width, for
// the fixed ln-rho node sets to resolve the Gaussian factor. Validated
// against the standard-normal-coordinate rule in the test suite.
constexpr double coarse_width_ratio = 0.20;
constexpr double fine_width_ratio = 0.05;

} // namespace

StrategyEngine::StrategyEngine(const Market& market, const PensionParams& pen,
                               const KernelLaw& law, const Solution& sol)
    : market_(market), pen_(pen), law_(law),
      util_(sol.terminal.util ? *sol.terminal.util : CrraUtility(pen.gamma)) {
    if (sol.regime.tag != RegimeTag::EffectiveTVaR)
        throw UnsupportedRegime("StrategyEngine: closed forms require the effective CRRA case");
    lambda_ = sol.lambda_star;
    nu_ = sol.nu_star;
    alpha_ = sol.alpha;
    ell_ = sol.ell;
    gamma_ = util_.gamma();
    rho_under_ = sol.terminal.rho_under;
    rho_bar_ = sol.terminal.rho_bar;
    rho_ell_ = sol.terminal.rho_ell;
    c_ = lambda_ * nu_ / alpha_;
    inv_marginal_floor_ = util_.inv_marginal(nu_ * rho_under_);
    va_ = std::log(rho_bar_);
    vb_ = std::log(rho_ell_);  // +inf when ell = 0 (no floor region)
    // nu rho - c equals nu rho_under at rho_bar and U'(ell) at rho_ell.
    g_at_a_ = rho_bar_ * std::pow(nu_ * rho_under_, -1.0 / gamma_);
    g_at_b_ = (ell_ > 0.0) ? rho_ell_ * std::pow(util_.u_prime(ell_), -1.0 / gamma_) : 0.0;

    if (std::isfinite(vb_)) {
        auto nodes = math::gl64_nodes();
        auto weights = math::gl64_weights();
        auto fill = [&](FixedNodes& fn, int panels) {
            const double h = (vb_ - va_) / panels;
            for (int p = 0; p < panels; ++p) {
                const double mid = va_ + (p + 0.5) * h;
                for (std::size_t j = 0; j < nodes.size(); ++j) {
                    const double v = mid + 0.5 * h * nodes[j];
                    const double x = std::exp(v);
                    const double base = std::pow(nu_ * x - c_, -1.0 / gamma_);
                    const double w = weights[j] * 0.5 * h;
                    fn.v.push_back(v);
                    fn.w1.push_back(w * x * base);
                    fn.w2.push_back(w * x * x * base / (nu_ * x - c_));
                }
            }
        };
        fill(coarse_, 1);
        fill(fine_, 4);
    }
}

StrategyEngine::BandPair StrategyEngine::band_pair(double mu, double st) const {
    const double width = vb_ - va_;  // inf when ell = 0: always the zeta route
    const FixedNodes* fn = nullptr;
    if (st >= coarse_width_ratio * width)
        fn = &coarse_;
    else if (st >= fine_width_ratio * width)
        fn = &fine_;
    if (fn) {
        // Fixed ln-rho nodes; only the Gaussian density varies per call.
        const double inv_st = 1.0 / st;
        double a1 = 0.0, a2 = 0.0;
        const std::size_t n = fn->v.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double u = (fn->v[j] - mu) * inv_st;
            const double dens = std::exp(-0.5 * u * u);
            a1 += dens * fn->w1[j];
            a2 += dens * fn->w2[j];
        }
        const double norm = math::inv_sqrt_2pi * inv_st;
        return {a1 * norm, a2 * norm};
    }
    return band_pair_zeta(mu, st);
}

StrategyEngine::BandPair StrategyEngine::band_pair_zeta(double mu, double st) const {
    // Standard-normal coordinate, robust as st -> 0.
    const double za = std::max((va_ - mu) / st, -math::u_max);
    const double zb = std::min((vb_ - mu) / st, math::u_max);
    if (zb <= za) return {0.0, 0.0};
    auto nodes = math::gl64_nodes();
    auto weights = math::gl64_weights();
    const double mid = 0.5 * (za + zb), half = 0.5 * (zb - za);
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double z = mid + half * nodes[j];
        const double x = std::exp(mu + st * z);
        const double base = std::pow(nu_ * x - c_, -1.0 / gamma_);
        const double w = weights[j] * math::norm_pdf(z);
        a1 += w * x * base;
        a2 += w * x * x * base / (nu_ * x - c_);
    }
    return {a1 * half, a2 * half};
}

double StrategyEngine::surplus_value(double t, double rho_t) const {
    const auto [mu, st] = law_.conditional(t, rho_t);
    const double p1 = (gamma_ - 1.0) / gamma_;
    double acc = std::pow(nu_, -1.0 / gamma_) * law_.partial_power(t, rho_t, p1, 0.0, rho_under_);
    acc += inv_marginal_floor_ * law_.partial_power(t, rho_t, 1.0, rho_under_, rho_bar_);
    acc += band_pair(mu, st).j1;
    if (ell_ > 0.0) acc += ell_ * law_.partial_power(t, rho_t, 1.0, rho_ell_, inf);
    return acc / rho_t;
}

double StrategyEngine::wealth(double t, double rho_t, double Yt, double at) const {
    return surplus_value(t, rho_t) - market_.annuity_D(pen_, t, Yt) + market_.annuity_L(t, at);
}

double StrategyEngine::delta(double t, double rho_t) const {
    const auto [mu, st] = law_.conditional(t, rho_t);
    const double p1 = (gamma_ - 1.0) / gamma_;

    double value = std::pow(nu_, -1.0 / gamma_) * law_.partial_power(t, rho_t, p1, 0.0, rho_under_);
    double deriv = std::pow(nu_, -1.0 / gamma_) *
                   law_.partial_power_drho(t, rho_t, p1, 0.0, rho_under_);
    value += inv_marginal_floor_ * law_.partial_power(t, rho_t, 1.0, rho_under_, rho_bar_);
    deriv += inv_marginal_floor_ * law_.partial_power_drho(t, rho_t, 1.0, rho_under_, rho_bar_);
    if (ell_ > 0.0) {
        value += ell_ * law_.partial_power(t, rho_t, 1.0, rho_ell_, inf);
        deriv += ell_ * law_.partial_power_drho(t, rho_t, 1.0, rho_ell_, inf);
    }
    const BandPair bp = band_pair(mu, st);
    value += bp.j1;
    // d/drho of the band integral: moving-boundary terms plus the drift of mu.
    const double ua = (va_ - mu) / st, ub = (vb_ - mu) / st;
    const double boundary =
        (math::norm_pdf(ua) * g_at_a_ - math::norm_pdf(ub) * g_at_b_) / (st * rho_t);
    deriv += boundary + (bp.j1 - (nu_ / gamma_) * bp.j2) / rho_t;

    // lambda(t) = -rho d(value/rho)/drho = value/rho * rho - deriv ... i.e.
    // Z*(t) - sum of dP/drho terms.
    return value / rho_t - deriv;
}

PortfolioWeights StrategyEngine::portfolio(double t, double rho_t, double Yt, double at) const {
    const double lam_t = delta(t, rho_t);
    const double D = market_.annuity_D(pen_, t, Yt);
    const double L = market_.annuity_L(t, at);
    const Vec2& xi = market_.xi();
    const Vec2& sD = market_.sigma_D();
    const Vec2& sL = market_.sigma_L();
    const double v1 = xi[0] * lam_t - sD[0] * D + sL[0] * L;
    const double v2 = xi[1] * lam_t - sD[1] * D + sL[1] * L;
    const MarketParams& p = market_.params();
    const double root = std::sqrt(1.0 - p.rho_IS * p.rho_IS);
    // (sigma^{-1})^T for sigma = [[sI, 0], [sS rho, sS root]].
    PortfolioWeights w;
    w.pi1 = v1 / p.sigma_I - v2 * p.rho_IS / (p.sigma_I * root);
    w.pi2 = v2 / (p.sigma_S * root);
    w.cash = surplus_value(t, rho_t) - D + L - w.pi1 - w.pi2;
    return w;
}

double StrategyEngine::h_integral(double t, double rho_t, double x) const {
    if (!(rho_bar_ < rho_ell_)) return 0.0;  // empty band
    const auto [mu, st] = law_.conditional(t, rho_t);
    const double za = std::max((va_ - mu) / st, -math::u_max);
    const double zb = std::min((vb_ - mu) / st, math::u_max);
    if (zb <= za) return 0.0;
    return math::integrate_gl64(
        [&](double z) {
            return math::norm_pdf(z) * std::pow(nu_ * std::exp(mu + st * z) - c_, -x);
        },
        za, zb, 1);
}

} // namespace tvp
