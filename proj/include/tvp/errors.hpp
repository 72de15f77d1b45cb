#pragma once

#include <stdexcept>
#include <string>

namespace tvp {

// Thrown when an argument leaves the mathematical domain of an operation
// (e.g. cdf at x <= 0, quantile outside (0,1), empty integration interval).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Risk premia are non-positive and no market-price-of-risk override was given.
struct NonPositivePremium : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The initial budget cannot fund the insurance floor (z_bar < 0).
struct InfeasibleBudget : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A root bracket did not show the sign change guaranteed by theory; signals
// a misconfigured model or a numerics bug upstream.
struct BracketFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature tails keep contributing, so the integral looks divergent
// (ill-posed utility/kernel combination).
struct DivergentIntegral : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A dynamic-strategy evaluation was requested outside the effective CRRA case.
struct UnsupportedRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration file error, carrying the field path that failed.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

} // namespace tvp
