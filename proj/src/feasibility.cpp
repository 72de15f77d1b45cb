#include "tvp/feasibility.hpp"

#include <algorithm>
#include <cmath>

namespace tvp {

double eta(const KernelLaw& law, double alpha, double lam) {
    if (!(lam > 0.0)) throw DomainError("eta: lambda must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("eta: alpha must lie in (0,1)");
    const double k = lam / alpha;
    // alpha - 1 + F(k) written as alpha - sf(k) to keep the tail accurate.
    return -law.lower_tail_expectation(k) + lam * (alpha - law.sf(k)) / alpha;
}

double zeta(const KernelLaw& law, double alpha, double lam) {
    const double k = lam / alpha;
    const double denom = alpha - law.sf(k);
    if (!(denom > 0.0)) throw DomainError("zeta: lambda must exceed alpha F^{-1}(1-alpha)");
    return law.lower_tail_expectation(k) / denom;
}

double solve_lambda_hat(const KernelLaw& law, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("solve_lambda_hat: alpha must lie in (0,1)");
    const double mean = law.mean();
    const double lo = alpha * law.quantile(1.0 - alpha);
    double hi = mean;
    // eta(E[rho]) = E[(rho - lambda/alpha)^+] > 0, but it can round to zero
    // when the upper tail mass is below double precision; nudge outward.
    for (int i = 0; i < 64 && eta(law, alpha, hi) <= 0.0; ++i) hi *= 1.0 + 4e-16;
    const double root = math::bisect([&](double l) { return eta(law, alpha, l); }, lo, hi,
                                     {.x_tol = 0.0, .max_iter = 200}, "solve_lambda_hat");
    return std::min(root, std::nextafter(mean, 0.0));
}

PiecewiseQuantile two_point_quantile(const KernelLaw& law, const CrraUtility& util, double ell,
                                     double alpha, double lambda_hat, double z_under) {
    if (!(z_under >= 0.0)) throw DomainError("two_point_quantile: z_under must be nonnegative");
    QuantileBuilder builder(law);
    if (z_under > 0.0) {
        const double level = alpha * z_under / (alpha - law.sf(lambda_hat / alpha));
        builder.add_until_kernel_value(lambda_hat / alpha, {SegmentKind::Zero});
        builder.add_tail({SegmentKind::Flat, level});
    } else {
        builder.add_tail({SegmentKind::Zero});
    }
    return std::move(builder).build(util, ell);
}

double solve_lambda_under(const KernelLaw& law, const CrraUtility& util, double alpha,
                          double ell, double z_under) {
    if (!(z_under > 0.0)) throw DomainError("solve_lambda_under: z_under must be positive");
    auto resid = [&](double lam) {
        return tvar_g(alpha, merton_floor_quantile(law, util, ell, lam)) - z_under;
    };
    return math::bisect_expanding(resid, 1e-8, 1e8, /*decreasing=*/true,
                                  {.x_tol = 0.0, .max_iter = 300}, "solve_lambda_under");
}

double cost_C(const KernelLaw& law, const CrraUtility& util, double ell, double lambda_under) {
    if (!(lambda_under > 0.0)) throw DomainError("cost_C: lambda_under must be positive");
    return budget_f(merton_floor_quantile(law, util, ell, lambda_under));
}

const char* to_string(RegimeTag tag) {
    switch (tag) {
        case RegimeTag::Infeasible: return "infeasible";
        case RegimeTag::UniqueTwoPoint: return "unique_two_point";
        case RegimeTag::IneffectiveTVaR: return "ineffective_tvar";
        case RegimeTag::EffectiveTVaR: return "effective_tvar";
    }
    return "?";
}

RegimeTag classify(double z_bar, double z_under, double R_value, double C_value) {
    if (!(z_under >= 0.0)) throw DomainError("classify: z_under must be nonnegative");
    const double tie = 1e-9 * std::max(1.0, std::abs(z_bar));
    if (z_bar < R_value - tie) return RegimeTag::Infeasible;
    if (std::abs(z_bar - R_value) <= tie) return RegimeTag::UniqueTwoPoint;
    if (z_bar >= C_value) return RegimeTag::IneffectiveTVaR;
    return RegimeTag::EffectiveTVaR;
}

Regime assess(const KernelLaw& law, const CrraUtility& util, double alpha, double ell,
              double z_bar, double z_under) {
    Regime r;
    r.lambda_hat = solve_lambda_hat(law, alpha);
    if (z_under > 0.0) {
        r.lambda_under = solve_lambda_under(law, util, alpha, ell, z_under);
        r.R_value = min_cost_R(r.lambda_hat, z_under);
        r.C_value = cost_C(law, util, ell, r.lambda_under);
    } else {
        r.lambda_under = inf;  // G >= 0 already implies TVaR >= 0
        r.R_value = 0.0;
        r.C_value = 0.0;
    }
    r.tag = classify(z_bar, z_under, r.R_value, r.C_value);
    return r;
}

} // namespace tvp
