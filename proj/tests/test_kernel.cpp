#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "tvp/kernel.hpp"

using namespace tvp;
using tvp::testing::rel_err;

TEST_CASE("law moments of the study parameters") {
    const KernelLaw law = testing::study_law();
    CHECK(law.m() == doctest::Approx(-2.029).epsilon(1e-12));
    CHECK(law.m() == -(0.05 + 0.5 * 0.00145) * 40.0);  // exact by construction
    CHECK(law.s() == doctest::Approx(0.24083189157584592).epsilon(1e-14));
    CHECK(law.mean() == doctest::Approx(0.1353352832366127).epsilon(1e-15));
    // martingale identity against the partial power moment
    CHECK(rel_err(law.partial_power0(1.0, 0.0, inf), law.mean()) < 1e-12);
}

TEST_CASE("cdf and quantile form an inverse pair") {
    const KernelLaw law = testing::study_law();
    CHECK(law.quantile(0.5) == doctest::Approx(0.13146692235929683).epsilon(1e-13));
    CHECK(law.cdf(law.quantile(0.25)) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(law.cdf(0.1) < law.cdf(0.2));
    for (double p : {1e-8, 1e-4, 0.1, 0.5, 0.9, 1.0 - 1e-4, 1.0 - 1e-8}) {
        const double x = law.quantile(p);
        CHECK(rel_err(law.quantile(law.cdf(x)), x) < 1e-10);
    }
    CHECK_THROWS_AS(law.cdf(-1.0), DomainError);
    CHECK_THROWS_AS(law.cdf(0.0), DomainError);
    CHECK_THROWS_AS(law.quantile(0.0), DomainError);
    CHECK_THROWS_AS(law.quantile(1.0), DomainError);
}

TEST_CASE("partial power moments: frozen references") {
    const KernelLaw law = testing::study_law();
    CHECK(law.partial_power0(0.0, 0.0, inf) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(law.partial_power0(1.0, 0.0, inf) == doctest::Approx(0.1353352832366127).epsilon(1e-13));
    CHECK(law.partial_power0(-1.25, 0.0, 1.0) ==
          doctest::Approx(13.217774806214415).epsilon(1e-12));
    CHECK(law.partial_power0(-0.25, 0.0, 0.05) ==
          doctest::Approx(6.3952255789645446e-05).epsilon(1e-11));
    CHECK(law.partial_power(20.0, 0.3, 1.0, 0.1, 0.5) ==
          doctest::Approx(0.082411396984787708).epsilon(1e-12));
    CHECK(law.partial_power(10.0, 0.8, 0.5, 0.05, 2.0) ==
          doctest::Approx(0.42020639313491631).epsilon(1e-12));
    CHECK_THROWS_AS(law.partial_power0(1.0, 2.0, 1.0), DomainError);
    CHECK_THROWS_AS(law.partial_power0(1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("partial power: additivity and martingale scaling") {
    const KernelLaw law = testing::study_law();
    const double ps[] = {-1.25, -0.25, 0.0, 0.5, 1.0, 2.0};
    for (double p : ps) {
        const double whole = law.partial_power(12.0, 0.4, p, 0.02, 0.9);
        const double split = law.partial_power(12.0, 0.4, p, 0.02, 0.2) +
                             law.partial_power(12.0, 0.4, p, 0.2, 0.9);
        CHECK(rel_err(split, whole) < 1e-12);
    }
    for (double rho_t : {0.2, 1.0, 2.5}) {
        const double got = law.partial_power(15.0, rho_t, 1.0, 0.0, inf);
        CHECK(rel_err(got, rho_t * std::exp(-0.05 * 25.0)) < 1e-13);
    }
}

TEST_CASE("partial power against a Monte Carlo oracle") {
    const KernelLaw law = testing::study_law();
    std::mt19937_64 eng(991);
    std::normal_distribution<double> normal;
    const int n = 1'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double rho = std::exp(law.m() + law.s() * normal(eng));
        const double v = (rho <= 1.0) ? std::pow(rho, -1.25) : 0.0;
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1.0));
    CHECK(std::abs(law.partial_power0(-1.25, 0.0, 1.0) - mean) < 3.0 * se);
}

TEST_CASE("partial power derivative: trivial cases and finite differences") {
    const KernelLaw law = testing::study_law();
    CHECK(law.partial_power_drho(20.0, 0.3, 0.0, 0.0, inf) == 0.0);
    CHECK(law.partial_power_drho(20.0, 0.3, 1.0, 0.0, inf) ==
          doctest::Approx(std::exp(-0.05 * 20.0)).epsilon(1e-13));

    const double ps[] = {-1.25, 0.0, 0.5, 1.0};
    const double bands[][2] = {{0.0, 0.2}, {0.1, 0.5}, {0.3, inf}, {0.0, inf}, {0.05, 1.5}};
    for (double p : ps) {
        for (const auto& band : bands) {
            for (double rho_t : {0.25, 0.8}) {
                const double h = 1e-5 * rho_t;
                const double fd = (law.partial_power(20.0, rho_t + h, p, band[0], band[1]) -
                                   law.partial_power(20.0, rho_t - h, p, band[0], band[1])) /
                                  (2.0 * h);
                const double an = law.partial_power_drho(20.0, rho_t, p, band[0], band[1]);
                if (std::abs(fd) > 1e-12)
                    CHECK(rel_err(an, fd) < 1e-6);
            }
        }
    }
}
