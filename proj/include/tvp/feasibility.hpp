#pragma once

#include "tvp/piecewise_quantile.hpp"
#include "tvp/quantile_integrals.hpp"

namespace tvp {

/// eta(lambda) = -E[rho 1{rho <= lambda/alpha}] + lambda (alpha - 1 + F(lambda/alpha))/alpha.
/// Its unique root lambda_hat prices the minimum-cost tail quantile.
double eta(const KernelLaw& law, double alpha, double lam);

/// zeta(lambda) = E[rho 1{rho <= lambda/alpha}] / (alpha - 1 + F(lambda/alpha)),
/// defined for lambda > alpha F^{-1}(1-alpha); minimized at lambda_hat with
/// value lambda_hat/alpha.
double zeta(const KernelLaw& law, double alpha, double lam);

/// Root of eta on (alpha F^{-1}(1-alpha), E[rho]), bisected to the limit of
/// double precision (the root can sit within a few ulps of E[rho] when the
/// kernel variance is small).
double solve_lambda_hat(const KernelLaw& law, double alpha);

/// Minimum budget cost of meeting the tail constraint: R(z_under) = lambda_hat * z_under.
inline double min_cost_R(double lambda_hat, double z_under) { return lambda_hat * z_under; }

/// The two-point quantile attaining R: zero below 1 - F(lambda_hat/alpha),
/// flat at alpha z_under / (alpha - 1 + F(lambda_hat/alpha)) above.
PiecewiseQuantile two_point_quantile(const KernelLaw& law, const CrraUtility& util, double ell,
                                     double alpha, double lambda_hat, double z_under);

/// Multiplier lambda_under solving
///   (1/alpha) int_0^alpha ((U')^{-1}(lambda F^{-1}(1-z)) - ell)^+ dz = z_under.
/// Requires z_under > 0; the left side is strictly decreasing in lambda.
double solve_lambda_under(const KernelLaw& law, const CrraUtility& util, double alpha,
                          double ell, double z_under);

/// Budget cost of the tail-optimal Merton-with-floor profile at lambda_under;
/// the threshold below which the tail constraint binds.
double cost_C(const KernelLaw& law, const CrraUtility& util, double ell, double lambda_under);

enum class RegimeTag { Infeasible, UniqueTwoPoint, IneffectiveTVaR, EffectiveTVaR };

const char* to_string(RegimeTag tag);

struct Regime {
    RegimeTag tag = RegimeTag::Infeasible;
    double R_value = 0.0;
    double C_value = 0.0;
    double lambda_hat = 0.0;
    double lambda_under = 0.0;  // +inf when z_under = 0 (constraint vacuous)
};

/// Pure comparison: Infeasible iff z_bar < R, UniqueTwoPoint on the tie band
/// |z_bar - R| <= 1e-9 max(1,|z_bar|), IneffectiveTVaR iff z_bar >= C,
/// EffectiveTVaR otherwise.
RegimeTag classify(double z_bar, double z_under, double R_value, double C_value);

/// Computes lambda_hat, lambda_under, R, C and classifies. z_under = 0
/// short-circuits to IneffectiveTVaR with R = C = 0.
Regime assess(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
              double z_bar, double z_under);

} // namespace tvp
