#include "tvp/quantile_integrals.hpp"

#include <algorithm>
#include <cmath>

namespace tvp {

namespace {

constexpr int panels_per_segment = 32;

// Quadrature of phi(u) * f(u) over [lo, hi] with a tail guard: when the
// interval was truncated at +-u_max, the outermost panel must both decay
// toward the boundary and carry at most 1e-8 of the running sum, otherwise
// the integral is flagged divergent. (A lognormal-integrable payoff decays
// Gaussian-fast toward the truncation point; a divergent one grows.)
template <class F>
double gauss_panels(F&& f, double lo, double hi, bool clipped_lo, bool clipped_hi) {
    if (hi <= lo) return 0.0;
    auto nodes = math::gl64_nodes();
    auto weights = math::gl64_weights();
    const double h = (hi - lo) / panels_per_segment;
    double total = 0.0;
    double panel[panels_per_segment];
    for (int p = 0; p < panels_per_segment; ++p) {
        const double mid = lo + (p + 0.5) * h;
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double u = mid + 0.5 * h * nodes[j];
            acc += weights[j] * math::norm_pdf(u) * f(u);
        }
        panel[p] = 0.5 * h * acc;
        total += panel[p];
    }
    const double scale = 1e-8 * std::abs(total);
    const int n = panels_per_segment;
    if (clipped_lo && std::abs(panel[0]) >= std::abs(panel[1]) && std::abs(panel[0]) > scale)
        throw DivergentIntegral("quantile integral: truncated lower tail still contributes");
    if (clipped_hi && std::abs(panel[n - 1]) >= std::abs(panel[n - 2]) &&
        std::abs(panel[n - 1]) > scale)
        throw DivergentIntegral("quantile integral: truncated upper tail still contributes");
    return total;
}

struct SegmentRange {
    double u_lo, u_hi;       // integration range in the Gaussian coordinate
    bool clipped_lo, clipped_hi;
};

SegmentRange clip(double u_lo, double u_hi) {
    SegmentRange r{std::max(u_lo, -math::u_max), std::min(u_hi, math::u_max),
                   u_lo < -math::u_max, u_hi > math::u_max};
    return r;
}

} // namespace

double budget_f(const PiecewiseQuantile& q) {
    const KernelLaw& law = q.law();
    double total = 0.0;
    for (std::size_t i = 0; i < q.segment_count(); ++i) {
        const Segment& seg = q.segment(i);
        if (seg.kind == SegmentKind::Zero) continue;
        const double u_hi = q.breakpoint(i).u;      // z_lo end
        const double u_lo = q.breakpoint(i + 1).u;  // z_hi end
        if (seg.kind == SegmentKind::Flat) {
            if (seg.level == 0.0) continue;
            const double a = (u_lo == -inf) ? 0.0 : law.x_of(u_lo);
            const double b = (u_hi == inf) ? inf : law.x_of(u_hi);
            if (b > a) total += seg.level * law.partial_power0(1.0, a, b);
            continue;
        }
        const auto [lo, hi, clo, chi] = clip(u_lo, u_hi);
        auto value = [&](double u) {
            const double x = law.x_of(u);
            const double arg = (seg.kind == SegmentKind::Merton) ? seg.nu * x
                                                                 : seg.nu * (x - seg.shift);
            return x * (q.utility().inv_marginal(arg) - q.floor());
        };
        total += gauss_panels(value, lo, hi, clo, chi);
    }
    return total;
}

double tvar_g(double alpha, const PiecewiseQuantile& q) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("tvar_g: alpha must lie in (0,1)");
    const KernelLaw& law = q.law();
    const double u_alpha = math::norm_ppf(1.0 - alpha);  // z <= alpha <=> u >= u_alpha
    double total = 0.0;
    for (std::size_t i = 0; i < q.segment_count(); ++i) {
        const Segment& seg = q.segment(i);
        const double z_lo = q.breakpoint(i).z;
        if (z_lo >= alpha) break;
        if (seg.kind == SegmentKind::Zero) continue;
        const double z_hi = std::min(q.breakpoint(i + 1).z, alpha);
        if (seg.kind == SegmentKind::Flat) {
            total += seg.level * (z_hi - z_lo);
            continue;
        }
        const double u_hi = q.breakpoint(i).u;
        const double u_lo = std::max(q.breakpoint(i + 1).u, u_alpha);
        const auto [lo, hi, clo, chi] = clip(u_lo, u_hi);
        auto value = [&](double u) {
            const double x = law.x_of(u);
            const double arg = (seg.kind == SegmentKind::Merton) ? seg.nu * x
                                                                 : seg.nu * (x - seg.shift);
            return q.utility().inv_marginal(arg) - q.floor();
        };
        total += gauss_panels(value, lo, hi, clo, chi);
    }
    return total / alpha;
}

double expected_utility(const PiecewiseQuantile& q) {
    const KernelLaw& law = q.law();
    const CrraUtility& util = q.utility();
    const double ell = q.floor();
    double total = 0.0;
    for (std::size_t i = 0; i < q.segment_count(); ++i) {
        const Segment& seg = q.segment(i);
        const double len = q.breakpoint(i + 1).z - q.breakpoint(i).z;
        if (seg.kind == SegmentKind::Zero) {
            total += util.u(ell) * len;
            continue;
        }
        if (seg.kind == SegmentKind::Flat) {
            total += util.u(seg.level + ell) * len;
            continue;
        }
        const auto [lo, hi, clo, chi] = clip(q.breakpoint(i + 1).u, q.breakpoint(i).u);
        auto value = [&](double u) {
            const double x = law.x_of(u);
            const double arg = (seg.kind == SegmentKind::Merton) ? seg.nu * x
                                                                 : seg.nu * (x - seg.shift);
            return util.u(util.inv_marginal(arg));
        };
        total += gauss_panels(value, lo, hi, clo, chi);
    }
    return total;
}

} // namespace tvp
