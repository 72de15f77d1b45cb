#include "tvp/market.hpp"

#include <cmath>
#include <sstream>

namespace tvp {

namespace {

// Threshold below which the annuity exponent switches to its limit branch,
// avoiding the cancellation in (e^{beta tau} - 1)/beta.
constexpr double beta_eps = 1e-12;

double annuity_factor(double beta, double tau_hi, double tau_lo) {
    // integral of e^{beta u} du over [tau_lo, tau_hi]
    if (std::abs(beta) < beta_eps) return tau_hi - tau_lo;
    return (std::exp(beta * tau_hi) - std::exp(beta * tau_lo)) / beta;
}

} // namespace

void MarketParams::validate() const {
    if (!(sigma_I > 0.0)) throw DomainError("market.sigma_I must be positive");
    if (!(sigma_S > 0.0)) throw DomainError("market.sigma_S must be positive");
    if (!(sigma_Y >= 0.0)) throw DomainError("market.sigma_Y must be nonnegative");
    if (!(sigma_a >= 0.0)) throw DomainError("market.sigma_a must be nonnegative");
    if (!(mu_a >= 0.0)) throw DomainError("market.mu_a must be nonnegative");
    if (!(std::abs(rho_IS) < 1.0)) throw DomainError("market.rho_IS must lie in (-1,1)");
    if (!(std::abs(rho_IY) <= 1.0)) throw DomainError("market.rho_IY must lie in [-1,1]");
    if (!(std::abs(rho_Ia) <= 1.0)) throw DomainError("market.rho_Ia must lie in [-1,1]");
    if (!(T > 0.0 && Tprime > T)) throw DomainError("market: need 0 < T < Tprime");
    if (!xi_override && !(r + mu_I > r0 && mu_S > r0))
        throw NonPositivePremium("market: risky returns must exceed r0 (or set xi_override)");
}

void PensionParams::validate() const {
    if (!(c > 0.0 && c <= 1.0)) throw DomainError("pension.c must lie in (0,1]");
    if (!(y0 > 0.0)) throw DomainError("pension.y0 must be positive");
    if (!(a0 > 0.0)) throw DomainError("pension.a0 must be positive");
    if (!(x0 > 0.0)) throw DomainError("pension.x0 must be positive");
    if (!(ell >= 0.0)) throw DomainError("pension.ell must be nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("pension.alpha must lie in (0,1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("pension.gamma must lie in (0,1)");
}

Vec2 derive_xi(const MarketParams& p, std::vector<std::string>* warnings) {
    const double kappa_I = (p.r + p.mu_I - p.r0) / p.sigma_I;
    const double kappa_S = (p.mu_S - p.r0) / p.sigma_S;
    if (!p.xi_override) {
        if (!(kappa_I > 0.0 && kappa_S > 0.0))
            throw NonPositivePremium("derive_xi: non-positive risk premium and no override");
        return {kappa_I, (kappa_S - p.rho_IS * kappa_I) / std::sqrt(1.0 - p.rho_IS * p.rho_IS)};
    }
    const Vec2 xi = *p.xi_override;
    if (warnings && kappa_I > 0.0 && kappa_S > 0.0) {
        const Vec2 derived{kappa_I,
                           (kappa_S - p.rho_IS * kappa_I) / std::sqrt(1.0 - p.rho_IS * p.rho_IS)};
        if (std::abs(derived[0] - xi[0]) > 1e-12 * std::max(1.0, std::abs(xi[0])) ||
            std::abs(derived[1] - xi[1]) > 1e-12 * std::max(1.0, std::abs(xi[1]))) {
            std::ostringstream os;
            os << "xi_override (" << xi[0] << ", " << xi[1] << ") replaces derived ("
               << derived[0] << ", " << derived[1] << ")";
            warnings->push_back(os.str());
        }
    }
    return xi;
}

Market::Market(const MarketParams& params) : p_(params) {
    p_.validate();
    xi_ = derive_xi(p_, &warnings_);
    const double sy = p_.sigma_Y, sa = p_.sigma_a;
    sigma_D_ = {sy * p_.rho_IY, sy * std::sqrt(1.0 - p_.rho_IY * p_.rho_IY)};
    sigma_L_ = {sa * p_.rho_Ia, sa * std::sqrt(1.0 - p_.rho_Ia * p_.rho_Ia)};
    beta_D_ = p_.mu_Y - p_.r0 - sigma_D_[0] * xi_[0] - sigma_D_[1] * xi_[1];
    beta_L_ = p_.mu_a - p_.r0 - sigma_L_[0] * xi_[0] - sigma_L_[1] * xi_[1];
}

double Market::annuity_D(const PensionParams& pen, double t, double Yt) const {
    if (!(t >= 0.0 && t <= p_.T)) throw DomainError("annuity_D: t must lie in [0, T]");
    if (!(Yt > 0.0)) throw DomainError("annuity_D: Yt must be positive");
    return annuity_factor(beta_D_, p_.T - t, 0.0) * pen.c * Yt;
}

double Market::annuity_L(double t, double at) const {
    if (!(t >= 0.0 && t <= p_.T)) throw DomainError("annuity_L: t must lie in [0, T]");
    if (!(at > 0.0)) throw DomainError("annuity_L: at must be positive");
    return annuity_factor(beta_L_, p_.Tprime - t, p_.T - t) * at;
}

SurplusBudget surplus_budget(const Market& mkt, const PensionParams& pen, const KernelLaw& law) {
    pen.validate();
    SurplusBudget b;
    b.d0 = mkt.annuity_D(pen, 0.0, pen.y0);
    b.ell0 = mkt.annuity_L(0.0, pen.a0);
    b.z0 = pen.x0 + b.d0 - b.ell0;
    b.z_bar = b.z0 - pen.ell * law.mean();
    b.z_under = std::max(pen.kappa - pen.ell, 0.0);
    b.beta_D = mkt.beta_D();
    b.beta_L = mkt.beta_L();
    b.sigma_D = mkt.sigma_D();
    b.sigma_L = mkt.sigma_L();
    if (b.z_bar < 0.0)
        throw InfeasibleBudget("surplus_budget: z_bar < 0, the floor cannot be funded");
    return b;
}

} // namespace tvp
