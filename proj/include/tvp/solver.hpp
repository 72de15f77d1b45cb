#pragma once

#include <optional>
#include <utility>

#include "tvp/feasibility.hpp"

namespace tvp {

/// phi_lambda(z) = -int_z^1 F^{-1}(1-y) dy + lambda (alpha-z)/alpha 1{z<=alpha},
/// evaluated through the closed-form lower tail expectation.
double phi(const KernelLaw& law, double alpha, double lam, double z);

/// Left derivative phi'_lambda(z) = F^{-1}(1-z) - (lambda/alpha) 1{z<=alpha}.
double phi_prime(const KernelLaw& law, double alpha, double lam, double z);

/// Tangency points of the concave envelope of phi_lambda: the envelope equals
/// phi on [0,z1] and [z2,1] and is linear in between, with the common slope
/// F^{-1}(1-z2). Stored in both probability and kernel-value coordinates;
/// x2 = F^{-1}(1-z2) doubles as the wealth threshold rho_under and stays
/// representable when z2 rounds to 1.
struct EnvelopePoints {
    double z1 = 0.0, z2 = 0.0;
    double x1 = 0.0;  // F^{-1}(1-z1) = x2 + lambda/alpha
    double x2 = 0.0;  // F^{-1}(1-z2), the envelope slope
};

/// Solves psi(z2) = phi(z2) - phi(s(z2)) - phi'(z2)(z2 - s(z2)) = 0 with
/// s(z) = 1 - F(F^{-1}(1-z) + lambda/alpha). The root is found in
/// kernel-value coordinates (log-bisection on x2) because z2 approaches 1
/// beyond double resolution as lambda -> lambda_hat.
EnvelopePoints tangent_points(const KernelLaw& law, double alpha, double lam);

/// Smallest z with phi'_lambda(z) < U'(ell)/nu; the zero/positive cutoff of
/// the auxiliary solution.
double hat_z(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
             double lam, double nu);

/// Optimal solution of the auxiliary problem for multipliers (lam, nu):
/// either Zero / ShiftedMerton / Flat / Merton (envelope branch) or
/// Zero / Merton (floor branch), chosen by z2 vs 1 - F(U'(ell)/nu).
PiecewiseQuantile auxiliary_quantile(const KernelLaw& law, const CrraUtility& util,
                                     double alpha, double ell, double lam, double nu,
                                     const EnvelopePoints& env);

/// The unique nu with tvar_g(alpha, G*_{lam,nu}) = z_under (g is strictly
/// decreasing in nu). Overload without EnvelopePoints recomputes them.
double inner_nu(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
                double lam, double z_under, const EnvelopePoints& env);
double inner_nu(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
                double lam, double z_under);

struct Multipliers {
    double lambda_star = 0.0;
    double nu_star = 0.0;
    double budget_residual = 0.0;  // f - z_bar
    double tvar_residual = 0.0;    // g - z_under
};

/// Nested search for the effective case: outer bisection on lambda over
/// [eps, 1-eps] * lambda_hat against f(lambda, h(lambda)) - z_bar (continuity
/// and the endpoint limits C and R guarantee a sign change; monotonicity is
/// not assumed, any root is optimal).
Multipliers solve_multipliers(const KernelLaw& law, const CrraUtility& util, double alpha,
                              double ell, double z_bar, double z_under, double lambda_hat);

/// Ineffective case: single multiplier nu with the budget binding,
/// int ((U')^{-1}(nu F^{-1}(1-z)) - ell)^+ F^{-1}(1-z) dz = z_bar.
std::pair<double, PiecewiseQuantile> ineffective_solution(const KernelLaw& law,
                                                          const CrraUtility& util, double ell,
                                                          double z_bar);

/// Terminal surplus as a function of the realized pricing kernel. The
/// effective case has four branches meeting continuously at rho_under <
/// rho_bar < rho_ell; terminal wealth is X*(T) = Z*(rho) + L(T).
class TerminalWealthMap {
public:
    TerminalWealthMap() = default;

    RegimeTag regime = RegimeTag::Infeasible;
    double lambda = 0.0, nu = 0.0;
    double alpha = 0.0, ell = 0.0;
    double rho_under = 0.0, rho_bar = 0.0, rho_ell = inf;
    double step_level = 0.0;  // UniqueTwoPoint flat level above the floor
    std::optional<CrraUtility> util;

    double operator()(double rho) const;
};

struct Solution {
    Regime regime;
    double alpha = 0.0, ell = 0.0;
    double z_bar = 0.0, z_under = 0.0;
    double lambda_star = 0.0;  // 0 outside the effective case
    double nu_star = 0.0;      // budget multiplier (all solved cases)
    EnvelopePoints env;        // meaningful in the effective case only
    double budget_residual = 0.0, tvar_residual = 0.0;
    std::optional<PiecewiseQuantile> quantile;  // absent when infeasible
    TerminalWealthMap terminal;
};

/// Full static solve: classify the regime and construct the optimal quantile
/// and terminal map. An Infeasible regime returns with quantile unset.
Solution solve(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
               double z_bar, double z_under);

} // namespace tvp
