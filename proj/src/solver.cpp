#include "tvp/solver.hpp"

#include <algorithm>
#include <cmath>

namespace tvp {

namespace {

// Relative slack when comparing the auxiliary-solution branch condition;
// both branches produce the same quantile at equality.
constexpr double branch_tie = 1e-12;

// psi(z2) rewritten in kernel-value coordinates x = F^{-1}(1-z2); strictly
// decreasing in x. All 1-F occurrences use the survival function and cdf
// differences stay in norm_mass, so the expression survives x -> 0.
double psi_x(const KernelLaw& law, double alpha, double lam, double x) {
    const double k = lam / alpha;
    const double mass = math::norm_mass(law.u_of(x), law.u_of(x + k));  // F(x+k) - F(x)
    return -law.lower_tail_expectation(x) + law.lower_tail_expectation(x + k) -
           lam * (alpha - law.sf(x + k)) / alpha - x * mass;
}

} // namespace

double phi(const KernelLaw& law, double alpha, double lam, double z) {
    if (!(z > 0.0 && z < 1.0)) throw DomainError("phi: z must lie in (0,1)");
    const double tail = -law.lower_tail_expectation(law.quantile(1.0 - z));
    return (z <= alpha) ? tail + lam * (alpha - z) / alpha : tail;
}

double phi_prime(const KernelLaw& law, double alpha, double lam, double z) {
    if (!(z > 0.0 && z < 1.0)) throw DomainError("phi_prime: z must lie in (0,1)");
    return law.quantile(1.0 - z) - ((z <= alpha) ? lam / alpha : 0.0);
}

EnvelopePoints tangent_points(const KernelLaw& law, double alpha, double lam) {
    if (!(lam > 0.0)) throw DomainError("tangent_points: lambda must be positive");
    const double x_hi = law.quantile(1.0 - alpha) * (1.0 - 1e-12);
    const double lx = math::bisect(
        [&](double t) { return -psi_x(law, alpha, lam, std::exp(t)); }, std::log(1e-300),
        std::log(x_hi), {.x_tol = 0.0, .max_iter = 240}, "tangent_points");
    EnvelopePoints env;
    env.x2 = std::exp(lx);
    env.x1 = env.x2 + lam / alpha;
    env.z2 = breakpoint_at_kernel_value(law, env.x2).z;
    env.z1 = breakpoint_at_kernel_value(law, env.x1).z;
    return env;
}

double hat_z(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
             double lam, double nu) {
    if (!(lam > 0.0 && nu > 0.0)) throw DomainError("hat_z: multipliers must be positive");
    const double w = util.u_prime(ell) / nu;  // inf when ell = 0
    if (law.quantile(1.0 - alpha) <= w + lam / alpha)
        return (w == inf) ? 0.0 : law.sf(w + lam / alpha);
    return law.sf(w);
}

PiecewiseQuantile auxiliary_quantile(const KernelLaw& law, const CrraUtility& util,
                                     double alpha, double ell, double lam, double nu,
                                     const EnvelopePoints& env) {
    if (!(lam > 0.0 && nu > 0.0))
        throw DomainError("auxiliary_quantile: multipliers must be positive");
    const double x4 = util.u_prime(ell) / nu;  // zero/Merton cutoff of the floor branch
    if (!(x4 >= env.x2 * (1.0 - branch_tie)))
        return merton_floor_quantile(law, util, ell, nu);

    // Envelope branch: Zero / ShiftedMerton / Flat / Merton with kernel-value
    // cutoffs xe >= x1 >= x2; zero-measure pieces are dropped by the builder.
    const double k = lam / alpha;
    const double xe = (x4 == inf) ? inf : x4 + k;
    const double level = util.inv_marginal(nu * env.x2) - ell;
    QuantileBuilder builder(law);
    builder.add_until_kernel_value(xe, {SegmentKind::Zero});
    builder.add_until_kernel_value(env.x1, {SegmentKind::ShiftedMerton, 0.0, nu, k});
    builder.add_until_kernel_value(env.x2, {SegmentKind::Flat, level});
    builder.add_tail({SegmentKind::Merton, 0.0, nu, 0.0});
    return std::move(builder).build(util, ell);
}

double inner_nu(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
                double lam, double z_under, const EnvelopePoints& env) {
    if (!(z_under > 0.0)) throw DomainError("inner_nu: z_under must be positive");
    auto resid = [&](double nu) {
        return tvar_g(alpha, auxiliary_quantile(law, util, alpha, ell, lam, nu, env)) - z_under;
    };
    return math::bisect_expanding(resid, 1e-8, 1e8, /*decreasing=*/true,
                                  {.x_tol = 0.0, .f_tol = 1e-13 * z_under, .max_iter = 300},
                                  "inner_nu");
}

double inner_nu(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
                double lam, double z_under) {
    return inner_nu(law, util, alpha, ell, lam, z_under, tangent_points(law, alpha, lam));
}

Multipliers solve_multipliers(const KernelLaw& law, const CrraUtility& util, double alpha,
                              double ell, double z_bar, double z_under, double lambda_hat) {
    constexpr double eps = 1e-6;
    auto f_of_lambda = [&](double lam) {
        const EnvelopePoints env = tangent_points(law, alpha, lam);
        const double nu = inner_nu(law, util, alpha, ell, lam, z_under, env);
        return budget_f(auxiliary_quantile(law, util, alpha, ell, lam, nu, env)) - z_bar;
    };
    const double lam = math::bisect(f_of_lambda, eps * lambda_hat, (1.0 - eps) * lambda_hat,
                                    {.x_tol = 0.0, .f_tol = 1e-9 * z_bar, .max_iter = 200},
                                    "solve_multipliers");
    Multipliers out;
    out.lambda_star = lam;
    const EnvelopePoints env = tangent_points(law, alpha, lam);
    out.nu_star = inner_nu(law, util, alpha, ell, lam, z_under, env);
    const PiecewiseQuantile q = auxiliary_quantile(law, util, alpha, ell, lam, out.nu_star, env);
    out.budget_residual = budget_f(q) - z_bar;
    out.tvar_residual = tvar_g(alpha, q) - z_under;
    return out;
}

std::pair<double, PiecewiseQuantile> ineffective_solution(const KernelLaw& law,
                                                          const CrraUtility& util, double ell,
                                                          double z_bar) {
    if (!(z_bar > 0.0)) throw DomainError("ineffective_solution: z_bar must be positive");
    auto resid = [&](double nu) {
        return budget_f(merton_floor_quantile(law, util, ell, nu)) - z_bar;
    };
    const double nu = math::bisect_expanding(resid, 1e-8, 1e8, /*decreasing=*/true,
                                             {.x_tol = 0.0, .f_tol = 1e-13 * z_bar, .max_iter = 300},
                                             "ineffective_solution");
    return {nu, merton_floor_quantile(law, util, ell, nu)};
}

double TerminalWealthMap::operator()(double rho) const {
    if (!(rho > 0.0)) throw DomainError("TerminalWealthMap: rho must be positive");
    switch (regime) {
        case RegimeTag::Infeasible:
            throw DomainError("TerminalWealthMap: no solution in the infeasible regime");
        case RegimeTag::UniqueTwoPoint:
            return (rho < rho_ell) ? step_level + ell : ell;
        case RegimeTag::IneffectiveTVaR:
            return (rho <= rho_ell) ? util->inv_marginal(nu * rho) : ell;
        case RegimeTag::EffectiveTVaR:
            if (rho <= rho_under) return util->inv_marginal(nu * rho);
            if (rho <= rho_bar) return util->inv_marginal(nu * rho_under);
            if (rho <= rho_ell) return util->inv_marginal(nu * rho - lambda * nu / alpha);
            return ell;
    }
    return ell;
}

Solution solve(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
               double z_bar, double z_under) {
    Solution sol;
    sol.alpha = alpha;
    sol.ell = ell;
    sol.z_bar = z_bar;
    sol.z_under = z_under;
    sol.regime = assess(law, util, alpha, ell, z_bar, z_under);
    sol.terminal.regime = sol.regime.tag;
    sol.terminal.alpha = alpha;
    sol.terminal.ell = ell;
    sol.terminal.util = util;

    switch (sol.regime.tag) {
        case RegimeTag::Infeasible:
            return sol;
        case RegimeTag::UniqueTwoPoint: {
            sol.quantile = two_point_quantile(law, util, ell, alpha, sol.regime.lambda_hat,
                                              z_under);
            sol.terminal.rho_ell = sol.regime.lambda_hat / alpha;  // step location
            sol.terminal.step_level =
                (z_under > 0.0)
                    ? alpha * z_under / (alpha - law.sf(sol.regime.lambda_hat / alpha))
                    : 0.0;
            break;
        }
        case RegimeTag::IneffectiveTVaR: {
            auto [nu, q] = ineffective_solution(law, util, ell, z_bar);
            sol.nu_star = nu;
            sol.quantile = std::move(q);
            sol.terminal.nu = nu;
            sol.terminal.rho_ell = (ell > 0.0) ? util.u_prime(ell) / nu : inf;
            break;
        }
        case RegimeTag::EffectiveTVaR: {
            const Multipliers mult = solve_multipliers(law, util, alpha, ell, z_bar, z_under,
                                                       sol.regime.lambda_hat);
            sol.lambda_star = mult.lambda_star;
            sol.nu_star = mult.nu_star;
            sol.env = tangent_points(law, alpha, mult.lambda_star);
            sol.quantile = auxiliary_quantile(law, util, alpha, ell, mult.lambda_star,
                                              mult.nu_star, sol.env);
            sol.terminal.lambda = mult.lambda_star;
            sol.terminal.nu = mult.nu_star;
            sol.terminal.rho_under = sol.env.x2;
            sol.terminal.rho_bar = sol.env.x2 + mult.lambda_star / alpha;
            sol.terminal.rho_ell = util.u_prime(ell) / mult.nu_star + mult.lambda_star / alpha;
            break;
        }
    }
    if (sol.quantile) {
        sol.budget_residual = budget_f(*sol.quantile) - z_bar;
        sol.tvar_residual = tvar_g(alpha, *sol.quantile) - z_under;
    }
    return sol;
}

} // namespace tvp
