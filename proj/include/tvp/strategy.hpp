#pragma once

#include <array>
#include <vector>

#include "tvp/market.hpp"
#include "tvp/solver.hpp"

namespace tvp {

struct PortfolioWeights {
    double pi1 = 0.0;  // dollars in the inflation-linked bond
    double pi2 = 0.0;  // dollars in the stock
    double cash = 0.0; // X* - pi1 - pi2
};

/// Closed-form CRRA wealth, delta and portfolio for the effective-tail-VaR
/// solution. Everything reduces to conditional partial power moments of the
/// kernel plus one residual band integral over (rho_bar, rho_ell], the region
/// where the terminal surplus is a shifted Merton profile with no lognormal
/// closed form.
///
/// The band integral is a Gauss-Legendre rule on the standard-normal
/// coordinate of ln rho(T). For speed along hedging paths, the same rule is
/// applied in the fixed ln-rho coordinate with precomputed node payloads when
/// the conditional density is wide enough to be resolved there; the tiers are
/// numerically identical within quadrature accuracy.
class StrategyEngine {
public:
    StrategyEngine(const Market& market, const PensionParams& pen, const KernelLaw& law,
                   const Solution& sol);

    /// Z*(t) = E_t[rho(T) Z*(T)] / rho(t).
    double surplus_value(double t, double rho_t) const;

    /// X*(t) = Z*(t) - D(t) + L(t).
    double wealth(double t, double rho_t, double Yt, double at) const;

    /// lambda(t) = -rho(t) dZ*(t)/drho(t), the replication delta.
    double delta(double t, double rho_t) const;

    /// pi*(t) = (sigma^{-1})^T [xi lambda(t) - sigma_D D(t) + sigma_L L(t)].
    PortfolioWeights portfolio(double t, double rho_t, double Yt, double at) const;

    /// E_t[(nu rho(T) - lambda nu / alpha)^{-x} 1{rho_bar < rho(T) <= rho_ell}],
    /// 64-point Gauss-Legendre on the standard-normal band; returns 0 on an
    /// empty band.
    double h_integral(double t, double rho_t, double x) const;

    const Market& market() const { return market_; }
    const PensionParams& pension() const { return pen_; }
    const KernelLaw& law() const { return law_; }

private:
    struct BandPair {
        double j1 = 0.0;  // E_t[rho (nu rho - c)^{-1/g} 1{band}]
        double j2 = 0.0;  // E_t[rho^2 (nu rho - c)^{-1/g-1} 1{band}]
    };
    BandPair band_pair(double mu, double st) const;
    BandPair band_pair_zeta(double mu, double st) const;

    Market market_;
    PensionParams pen_;
    KernelLaw law_;
    CrraUtility util_;
    double lambda_ = 0.0, nu_ = 0.0, alpha_ = 0.0, ell_ = 0.0, gamma_ = 0.0;
    double rho_under_ = 0.0, rho_bar_ = 0.0, rho_ell_ = 0.0;
    double c_ = 0.0;               // lambda nu / alpha
    double inv_marginal_floor_ = 0.0;  // (U')^{-1}(nu rho_under)
    double va_ = 0.0, vb_ = 0.0;   // ln rho_bar, ln rho_ell
    double g_at_a_ = 0.0, g_at_b_ = 0.0;  // rho (nu rho - c)^{-1/g} at the band ends
    // Fixed ln-rho nodes: one 64-point panel and a 4x64 refinement.
    struct FixedNodes {
        std::vector<double> v;
        std::vector<double> w1;  // weight * e^{v} (nu e^{v} - c)^{-1/g}
        std::vector<double> w2;  // weight * e^{2v} (nu e^{v} - c)^{-1/g-1}
    };
    FixedNodes coarse_, fine_;
};

} // namespace tvp
