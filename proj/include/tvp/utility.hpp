#pragma once

#include <cmath>
#include <limits>

#include "tvp/errors.hpp"

namespace tvp {

/// CRRA utility u(x) = x^{1-gamma}/(1-gamma), gamma in (0,1). Satisfies the
/// Inada conditions: u'(0+) = inf, u'(inf) = 0.
class CrraUtility {
public:
    explicit CrraUtility(double gamma) : gamma_(gamma) {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw DomainError("CrraUtility: gamma must lie in (0,1)");
    }

    double gamma() const { return gamma_; }

    double u(double x) const {
        if (x < 0.0) throw DomainError("CrraUtility::u: x must be nonnegative");
        return std::pow(x, 1.0 - gamma_) / (1.0 - gamma_);
    }

    /// u'(x) = x^{-gamma}; u'(0) = +inf by the Inada condition.
    double u_prime(double x) const {
        if (x < 0.0) throw DomainError("CrraUtility::u_prime: x must be nonnegative");
        if (x == 0.0) return std::numeric_limits<double>::infinity();
        return std::pow(x, -gamma_);
    }

    /// (u')^{-1}(y) = y^{-1/gamma}; maps +inf to 0.
    double inv_marginal(double y) const {
        if (!(y > 0.0)) throw DomainError("CrraUtility::inv_marginal: y must be positive");
        if (y == std::numeric_limits<double>::infinity()) return 0.0;
        return std::pow(y, -1.0 / gamma_);
    }

private:
    double gamma_;
};

} // namespace tvp
