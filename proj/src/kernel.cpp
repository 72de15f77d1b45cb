#include "tvp/kernel.hpp"

#include <cmath>

namespace tvp {

KernelLaw::KernelLaw(double r0, double xi_norm_sq, double T)
    : r0_(r0), xi_norm_sq_(xi_norm_sq), xi_norm_(std::sqrt(xi_norm_sq)), T_(T) {
    if (!(xi_norm_sq > 0.0)) throw DomainError("KernelLaw: ||xi||^2 must be positive");
    if (!(T > 0.0)) throw DomainError("KernelLaw: T must be positive");
    m_ = -(r0 + 0.5 * xi_norm_sq) * T;
    s_ = xi_norm_ * std::sqrt(T);
}

double KernelLaw::cdf(double x) const {
    if (x == inf) return 1.0;
    if (!(x > 0.0)) throw DomainError("KernelLaw::cdf: x must be positive");
    return math::norm_cdf(u_of(x));
}

double KernelLaw::sf(double x) const {
    if (x == inf) return 0.0;
    if (!(x > 0.0)) throw DomainError("KernelLaw::sf: x must be positive");
    return math::norm_sf(u_of(x));
}

double KernelLaw::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("KernelLaw::quantile: p must lie in (0,1)");
    return x_of(math::norm_ppf(p));
}

KernelLaw::Conditional KernelLaw::conditional(double t, double rho_t) const {
    if (!(t >= 0.0 && t < T_)) throw DomainError("KernelLaw: t must lie in [0, T)");
    if (!(rho_t > 0.0)) throw DomainError("KernelLaw: rho_t must be positive");
    const double tau = T_ - t;
    return {std::log(rho_t) - (r0_ + 0.5 * xi_norm_sq_) * tau, xi_norm_ * std::sqrt(tau)};
}

double KernelLaw::partial_power(double t, double rho_t, double p, double a, double b) const {
    if (!(a >= 0.0) || !(b > a)) throw DomainError("KernelLaw::partial_power: need 0 <= a < b");
    const auto [mu, st] = conditional(t, rho_t);
    const double ha = (a == 0.0) ? -inf : (std::log(a) - mu - p * st * st) / st;
    const double hb = (b == inf) ? inf : (std::log(b) - mu - p * st * st) / st;
    return std::exp(p * mu + 0.5 * p * p * st * st) * math::norm_mass(ha, hb);
}

double KernelLaw::partial_power_drho(double t, double rho_t, double p, double a, double b) const {
    if (!(a >= 0.0) || !(b > a)) throw DomainError("KernelLaw::partial_power_drho: need 0 <= a < b");
    const auto [mu, st] = conditional(t, rho_t);
    const double ha = (a == 0.0) ? -inf : (std::log(a) - mu - p * st * st) / st;
    const double hb = (b == inf) ? inf : (std::log(b) - mu - p * st * st) / st;
    const double scale = std::exp(p * mu + 0.5 * p * p * st * st);
    // d mu / d rho_t = 1/rho_t shifts both the power factor and the bounds.
    const double interior = p / rho_t * scale * math::norm_mass(ha, hb);
    const double pa = (a == 0.0) ? 0.0 : math::norm_pdf(ha);
    const double pb = (b == inf) ? 0.0 : math::norm_pdf(hb);
    return interior + scale * (pa - pb) / (st * rho_t);
}

} // namespace tvp
