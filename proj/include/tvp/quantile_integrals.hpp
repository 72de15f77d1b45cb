#pragma once

#include "tvp/piecewise_quantile.hpp"

namespace tvp {

/// Budget cost of a quantile: integral over (0,1) of G(z) F^{-1}(1-z) dz.
///
/// Zero and Flat segments are integrated in closed form (partial power
/// moments); Merton-type segments go through the Gaussian substitution
/// z = 1 - Phi(u), which turns the weighted integral into
/// int phi(u) e^{m+su} G(1-Phi(u)) du on [-u_max, u_max], evaluated with
/// 64-point Gauss-Legendre on 32 panels. Throws DivergentIntegral when a
/// truncated tail panel still carries more than 1e-8 of the running sum.
double budget_f(const PiecewiseQuantile& q);

/// Tail-VaR functional (1/alpha) * integral over (0,alpha] of G(z) dz, same
/// segment treatment under the Gaussian substitution (no kernel weight).
double tvar_g(double alpha, const PiecewiseQuantile& q);

/// Objective integral over (0,1) of U(G(z) + ell) dz.
double expected_utility(const PiecewiseQuantile& q);

} // namespace tvp
