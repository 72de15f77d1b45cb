#pragma once

#include <cmath>
#include <functional>
#include <span>

#include "tvp/errors.hpp"

namespace tvp::math {

inline constexpr double sqrt2 = 1.4142135623730951;
inline constexpr double inv_sqrt_2pi = 0.3989422804014327;

// Standard-normal quantities beyond |u| = u_max are treated as saturated:
// cdf rounds to 0/1 and the Gaussian-substitution quadratures truncate there
// (mass beyond is < 6e-17).
inline constexpr double u_max = 8.3;

inline double norm_pdf(double x) {
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / sqrt2);
}

// Survival function 1 - Phi(x), accurate in the upper tail.
inline double norm_sf(double x) {
    return 0.5 * std::erfc(x / sqrt2);
}

// Integral of the standard normal density over [a, b], a <= b, computed from
// whichever tail keeps relative precision.
inline double norm_mass(double a, double b) {
    if (b <= a) return 0.0;
    if (a >= 0.0) return norm_sf(a) - norm_sf(b);
    if (b <= 0.0) return norm_cdf(b) - norm_cdf(a);
    return 1.0 - norm_cdf(a) - norm_sf(b);
}

// Inverse standard-normal cdf (Acklam's rational approximation polished with
// one Halley step); absolute error well below 1e-13 on (0,1).
double norm_ppf(double p);

// 64-point Gauss-Legendre nodes/weights on [-1, 1].
std::span<const double> gl64_nodes();
std::span<const double> gl64_weights();

// Plain Gauss-Legendre integration of f over [a, b] split into `panels`
// equal panels, 64 points each.
template <class F>
double integrate_gl64(F&& f, double a, double b, int panels) {
    if (b <= a) return 0.0;
    auto nodes = gl64_nodes();
    auto weights = gl64_weights();
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double half = 0.5 * h;
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j)
            acc += weights[j] * f(mid + half * nodes[j]);
        total += half * acc;
    }
    return total;
}

struct BisectOptions {
    double x_tol = 0.0;  // 0 -> iterate until the bracket cannot shrink
    double f_tol = 0.0;  // 0 -> disabled; stop once |f(mid)| <= f_tol
    int max_iter = 200;
};

// Bisection for a continuous f with f(lo), f(hi) of opposite signs.
// Throws BracketFailure (tagged with `what`) when the bracket does not
// straddle a root.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              const BisectOptions& opt, const char* what);

// Expands [lo, hi] geometrically (by `factor`) until f changes sign, then
// bisects. `decreasing` states the expected monotonicity of f.
double bisect_expanding(const std::function<double(double)>& f, double lo, double hi,
                        bool decreasing, const BisectOptions& opt, const char* what);

} // namespace tvp::math
