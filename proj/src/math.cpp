#include "tvp/math.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace tvp::math {

namespace {

// Acklam's inverse normal cdf approximation, |rel err| < 1.2e-9 before polish.
double ppf_acklam(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

std::array<std::array<double, 64>, 2> compute_gl64() {
    constexpr int n = 64;
    std::array<std::array<double, 64>, 2> out{};
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        out[0][n - 1 - i] = x;
        out[0][i] = -x;
        out[1][i] = w;
        out[1][n - 1 - i] = w;
    }
    return out;
}

const std::array<std::array<double, 64>, 2>& gl64_table() {
    static const auto table = compute_gl64();
    return table;
}

} // namespace

namespace {

// p <= 0.5 branch: the erfc-based cdf keeps full relative precision there,
// so the Halley polish is effective deep into the tail.
double ppf_lower(double p) {
    double x = ppf_acklam(p);
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

} // namespace

double norm_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_ppf: p must lie in (0,1)");
    // 1 - p is exact for p in [0.5, 1) (same binade as 1), so reflection
    // preserves tail accuracy.
    return (p <= 0.5) ? ppf_lower(p) : -ppf_lower(1.0 - p);
}

std::span<const double> gl64_nodes() { return gl64_table()[0]; }
std::span<const double> gl64_weights() { return gl64_table()[1]; }

double bisect(const std::function<double(double)>& f, double lo, double hi,
              const BisectOptions& opt, const char* what) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        throw BracketFailure(std::string(what) + ": no sign change on bracket");
    for (int it = 0; it < opt.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket exhausted at this precision
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (opt.f_tol > 0.0 && std::abs(fm) <= opt.f_tol) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= opt.x_tol) break;
    }
    return 0.5 * (lo + hi);
}

double bisect_expanding(const std::function<double(double)>& f, double lo, double hi,
                        bool decreasing, const BisectOptions& opt, const char* what) {
    const double sign = decreasing ? 1.0 : -1.0;
    int guard = 0;
    while (sign * f(lo) < 0.0) {
        lo /= 16.0;
        if (++guard > 80) throw BracketFailure(std::string(what) + ": lower bracket expansion failed");
    }
    guard = 0;
    while (sign * f(hi) > 0.0) {
        hi *= 16.0;
        if (++guard > 80) throw BracketFailure(std::string(what) + ": upper bracket expansion failed");
    }
    return bisect(f, lo, hi, opt, what);
}

} // namespace tvp::math
