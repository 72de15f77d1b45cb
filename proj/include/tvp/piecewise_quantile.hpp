#pragma once

#include <cstddef>
#include <vector>

#include "tvp/kernel.hpp"
#include "tvp/utility.hpp"

namespace tvp {

enum class SegmentKind { Zero, Flat, Merton, ShiftedMerton };

/// One analytic piece of a quantile function on (0,1). The Merton kinds
/// evaluate to (U')^{-1}(nu * x) - ell and (U')^{-1}(nu * (x - shift)) - ell
/// with x = F^{-1}(1-z) the kernel value at probability level z.
struct Segment {
    SegmentKind kind = SegmentKind::Zero;
    double level = 0.0;  // Flat
    double nu = 0.0;     // Merton / ShiftedMerton
    double shift = 0.0;  // ShiftedMerton
};

/// A breakpoint is stored both as a probability level z and as the Gaussian
/// coordinate u of the matching kernel value (z = 1 - Phi(u)). The u
/// coordinate stays meaningful when z rounds to 1 and drives all integrals.
struct Breakpoint {
    double z = 0.0;
    double u = 0.0;  // +inf at z = 0, -inf at z = 1
};

/// Left-continuous increasing quantile built from analytic segments. Segment
/// i covers z in (breaks[i].z, breaks[i+1].z], i.e. kernel values in
/// [x(breaks[i+1]), x(breaks[i])).
class PiecewiseQuantile {
public:
    PiecewiseQuantile(KernelLaw law, CrraUtility util, double ell,
                      std::vector<Breakpoint> breaks, std::vector<Segment> segments);

    double operator()(double z) const;

    const KernelLaw& law() const { return law_; }
    const CrraUtility& utility() const { return util_; }
    double floor() const { return ell_; }
    std::size_t segment_count() const { return segments_.size(); }
    const Segment& segment(std::size_t i) const { return segments_[i]; }
    const Breakpoint& breakpoint(std::size_t i) const { return breaks_[i]; }
    std::size_t breakpoint_count() const { return breaks_.size(); }

    double segment_value(const Segment& s, double z) const;

private:
    KernelLaw law_;
    CrraUtility util_;
    double ell_;
    std::vector<Breakpoint> breaks_;
    std::vector<Segment> segments_;
};

/// Helper used by the builders: breakpoint at the kernel value x, i.e. at
/// probability level z = 1 - F(x). Handles x = inf (z = 0 endpoint).
Breakpoint breakpoint_at_kernel_value(const KernelLaw& law, double x);

/// Assembles a quantile from segments delimited by kernel-value cutoffs
/// (descending x <-> ascending z). Pieces whose probability measure rounds
/// to zero are dropped and their neighbors take over the range, which keeps
/// the construction stable when a cutoff level underflows to z = 0 or 1.
class QuantileBuilder {
public:
    explicit QuantileBuilder(const KernelLaw& law) : law_(law) {}

    /// Appends `seg` on the z-interval from the previous cutoff down to
    /// kernel value x_end (i.e. up to z = 1 - F(x_end)).
    void add_until_kernel_value(double x_end, const Segment& seg);

    /// Appends the final segment reaching z = 1.
    void add_tail(const Segment& seg);

    PiecewiseQuantile build(const CrraUtility& util, double ell) &&;

private:
    const KernelLaw& law_;
    std::vector<Breakpoint> breaks_{{0.0, inf}};
    std::vector<Segment> segments_;
};

/// The zero-then-Merton quantile ((U')^{-1}(nu F^{-1}(1-z)) - ell)^+ shared by
/// the ineffective solution, the minimum threshold cost and the lambda -> 0
/// limit of the auxiliary problem.
PiecewiseQuantile merton_floor_quantile(const KernelLaw& law, const CrraUtility& util,
                                        double ell, double nu);

} // namespace tvp
