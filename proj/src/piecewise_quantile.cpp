#include "tvp/piecewise_quantile.hpp"

#include <algorithm>
#include <cmath>

namespace tvp {

PiecewiseQuantile::PiecewiseQuantile(KernelLaw law, CrraUtility util, double ell,
                                     std::vector<Breakpoint> breaks,
                                     std::vector<Segment> segments)
    : law_(law), util_(util), ell_(ell), breaks_(std::move(breaks)),
      segments_(std::move(segments)) {
    if (breaks_.size() != segments_.size() + 1 || segments_.empty())
        throw DomainError("PiecewiseQuantile: need k segments and k+1 breakpoints");
    if (breaks_.front().z != 0.0 || breaks_.back().z != 1.0)
        throw DomainError("PiecewiseQuantile: breakpoints must span (0,1)");
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
        if (!(breaks_[i].z < breaks_[i + 1].z))
            throw DomainError("PiecewiseQuantile: breakpoints must be strictly increasing");
}

double PiecewiseQuantile::segment_value(const Segment& s, double z) const {
    switch (s.kind) {
        case SegmentKind::Zero:
            return 0.0;
        case SegmentKind::Flat:
            return s.level;
        case SegmentKind::Merton:
            return util_.inv_marginal(s.nu * law_.quantile(1.0 - z)) - ell_;
        case SegmentKind::ShiftedMerton:
            return util_.inv_marginal(s.nu * (law_.quantile(1.0 - z) - s.shift)) - ell_;
    }
    return 0.0;
}

double PiecewiseQuantile::operator()(double z) const {
    if (!(z > 0.0 && z < 1.0)) throw DomainError("PiecewiseQuantile: z must lie in (0,1)");
    // Left-continuous: z = breaks[i].z belongs to segment i-1.
    std::size_t lo = 0, hi = breaks_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (breaks_[mid].z < z)
            lo = mid;
        else
            hi = mid;
    }
    return segment_value(segments_[lo], z);
}

Breakpoint breakpoint_at_kernel_value(const KernelLaw& law, double x) {
    if (x == inf) return {0.0, inf};
    const double u = law.u_of(x);
    return {math::norm_sf(u), u};
}

void QuantileBuilder::add_until_kernel_value(double x_end, const Segment& seg) {
    const Breakpoint b = breakpoint_at_kernel_value(law_, x_end);
    if (b.z > breaks_.back().z) {
        breaks_.push_back(b);
        segments_.push_back(seg);
    }
    // else: the piece has no probability mass; the next segment takes over
}

void QuantileBuilder::add_tail(const Segment& seg) {
    if (breaks_.back().z < 1.0) {
        breaks_.push_back({1.0, -inf});
        segments_.push_back(seg);
    }
    // else: the previous cutoff already reached z = 1 (its u stays finite,
    // which keeps the closed-form segment integrals pointing at the true
    // kernel-value range; the missing sliver carries no double-precision mass)
}

PiecewiseQuantile QuantileBuilder::build(const CrraUtility& util, double ell) && {
    return PiecewiseQuantile(law_, util, ell, std::move(breaks_), std::move(segments_));
}

PiecewiseQuantile merton_floor_quantile(const KernelLaw& law, const CrraUtility& util,
                                        double ell, double nu) {
    if (!(nu > 0.0)) throw DomainError("merton_floor_quantile: nu must be positive");
    QuantileBuilder builder(law);
    if (ell > 0.0)  // value positive iff x < U'(ell)/nu
        builder.add_until_kernel_value(util.u_prime(ell) / nu, {SegmentKind::Zero});
    builder.add_tail({SegmentKind::Merton, 0.0, nu, 0.0});
    return std::move(builder).build(util, ell);
}

} // namespace tvp
