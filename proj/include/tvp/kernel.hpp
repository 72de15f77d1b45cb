#pragma once

#include <cmath>
#include <limits>

#include "tvp/errors.hpp"
#include "tvp/math.hpp"

namespace tvp {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Lognormal law of the pricing kernel rho(T):
///   ln rho(T) ~ N(m, s^2),  m = -(r0 + ||xi||^2/2) T,  s = ||xi|| sqrt(T),
/// plus the conditional law of rho(T) given rho(t). Every closed form and
/// integral in the solver reduces to its cdf/quantile and partial power
/// moments.
class KernelLaw {
public:
    KernelLaw(double r0, double xi_norm_sq, double T);

    double r0() const { return r0_; }
    double xi_norm_sq() const { return xi_norm_sq_; }
    double xi_norm() const { return xi_norm_; }
    double horizon() const { return T_; }
    double m() const { return m_; }
    double s() const { return s_; }

    /// E[rho(T)] = e^{-r0 T}.
    double mean() const { return std::exp(-r0_ * T_); }

    double cdf(double x) const;
    /// 1 - cdf(x), accurate in the upper tail.
    double sf(double x) const;
    double quantile(double p) const;

    /// Gaussian coordinate of a kernel value: u = (ln x - m)/s.
    double u_of(double x) const { return (std::log(x) - m_) / s_; }
    double x_of(double u) const { return std::exp(m_ + s_ * u); }

    /// E[rho(T)^p 1{a < rho(T) <= b} | rho(t) = rho_t]; a = 0 and b = inf are
    /// first-class.
    double partial_power(double t, double rho_t, double p, double a, double b) const;

    /// Exact d/d rho_t of partial_power.
    double partial_power_drho(double t, double rho_t, double p, double a, double b) const;

    /// Unconditional (t = 0, rho_t = 1) partial power moment.
    double partial_power0(double p, double a, double b) const {
        return partial_power(0.0, 1.0, p, a, b);
    }

    /// E[rho 1{rho <= k}] used by the z-space integrals.
    double lower_tail_expectation(double k) const { return partial_power0(1.0, 0.0, k); }

    struct Conditional {
        double mu;  // mean of ln rho(T) given rho(t)
        double s;   // std dev of ln rho(T) given rho(t)
    };
    Conditional conditional(double t, double rho_t) const;

private:
    double r0_, xi_norm_sq_, xi_norm_, T_, m_, s_;
};

} // namespace tvp
