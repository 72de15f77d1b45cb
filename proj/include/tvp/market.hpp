#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tvp/kernel.hpp"

namespace tvp {

using Vec2 = std::array<double, 2>;

/// Exogenous model coefficients. Rates and drifts are per year.
struct MarketParams {
    double r = 0.0;        // inflation-linked bond return over inflation
    double r0 = 0.0;       // risk-free short rate
    double mu_I = 0.0, sigma_I = 0.0;
    double mu_S = 0.0, sigma_S = 0.0;
    double rho_IS = 0.0;
    double mu_Y = 0.0, sigma_Y = 0.0, rho_IY = 0.0;
    double mu_a = 0.0, sigma_a = 0.0, rho_Ia = 0.0;
    double T = 0.0;        // retirement time
    double Tprime = 0.0;   // death time
    std::optional<Vec2> xi_override;  // replaces the derived market price of risk

    void validate() const;
};

struct PensionParams {
    double c = 0.0;      // contribution rate in (0,1]
    double y0 = 0.0;     // initial salary
    double a0 = 0.0;     // initial living-standard level
    double x0 = 0.0;     // initial fund wealth
    double ell = 0.0;    // insurance floor above the guarantee
    double kappa = 0.0;  // tail-VaR reference
    double alpha = 0.0;  // tail-VaR confidence level in (0,1)
    double gamma = 0.0;  // CRRA coefficient in (0,1)

    void validate() const;
};

/// Market price of risk solving sigma * xi = (r + mu_I - r0, mu_S - r0)^T.
/// When xi_override is present it wins verbatim and the discrepancy against
/// the derived value is reported through `warnings`.
Vec2 derive_xi(const MarketParams& p, std::vector<std::string>* warnings = nullptr);

/// Validated market with the market price of risk resolved and the annuity
/// loadings precomputed. Immutable after construction.
class Market {
public:
    explicit Market(const MarketParams& params);

    const MarketParams& params() const { return p_; }
    const Vec2& xi() const { return xi_; }
    double xi_norm_sq() const { return xi_[0] * xi_[0] + xi_[1] * xi_[1]; }
    const Vec2& sigma_D() const { return sigma_D_; }
    const Vec2& sigma_L() const { return sigma_L_; }
    double beta_D() const { return beta_D_; }
    double beta_L() const { return beta_L_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Present value at t of future contributions, D(t) given Y(t) = Yt.
    double annuity_D(const PensionParams& pen, double t, double Yt) const;

    /// Present value at t of the post-retirement guarantee, L(t) given a(t) = at.
    double annuity_L(double t, double at) const;

    KernelLaw kernel_law() const { return KernelLaw(p_.r0, xi_norm_sq(), p_.T); }

private:
    MarketParams p_;
    Vec2 xi_{};
    Vec2 sigma_D_{}, sigma_L_{};
    double beta_D_ = 0.0, beta_L_ = 0.0;
    std::vector<std::string> warnings_;
};

/// Time-0 surplus bookkeeping for the static problem.
struct SurplusBudget {
    double d0 = 0.0;       // value of future contributions
    double ell0 = 0.0;     // value of the guarantee
    double z0 = 0.0;       // x0 + d0 - ell0
    double z_bar = 0.0;    // z0 - ell * E[rho(T)]
    double z_under = 0.0;  // max(kappa - ell, 0)
    double beta_D = 0.0, beta_L = 0.0;
    Vec2 sigma_D{}, sigma_L{};
};

/// Throws InfeasibleBudget when z_bar < 0 (the floor cannot be funded).
SurplusBudget surplus_budget(const Market& mkt, const PensionParams& pen, const KernelLaw& law);

} // namespace tvp
