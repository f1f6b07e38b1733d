#include "ppmqkd/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace ppmqkd;

namespace {

// Independent erf oracle: alternating Maclaurin series in extended precision.
long double erf_series(long double x) {
    const long double two_over_sqrt_pi = 1.1283791670955125738961589L;
    long double term = x;
    long double sum = x;
    for (int k = 1; k < 200; ++k) {
        term *= -x * x / k;
        sum += term / (2 * k + 1);
        if (std::abs(term) < 1e-25L * std::abs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

double inverse_erf_bisection(double y) {
    long double lo = 0.0L, hi = 8.0L;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        if (erf_series(mid) < y) lo = mid; else hi = mid;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

} // namespace

TEST_CASE("inverse_erf fixed points") {
    CHECK(inverse_erf(0.0) == 0.0);

    // y = erf(1) must invert back to 1.
    const double y = static_cast<double>(erf_series(1.0L));
    CHECK(inverse_erf(y) == doctest::Approx(1.0).epsilon(1e-10));

    // Pinned by the series + bisection oracle.
    const double pinned = inverse_erf_bisection(0.99999);
    CHECK(pinned == doctest::Approx(3.12341).epsilon(1e-4));
    CHECK(inverse_erf(0.99999) == doctest::Approx(pinned).epsilon(1e-10));
}

TEST_CASE("inverse_erf round trip accuracy") {
    for (double y : {1e-8, 1e-3, 0.1, 0.5, 0.8427007929497149, 0.99, 0.999999}) {
        const double x = inverse_erf(y);
        CHECK(std::abs(std::erf(x) - y) <= 1e-12);
    }
}

TEST_CASE("inverse_erf rejects out-of-domain input") {
    CHECK_THROWS_AS(inverse_erf(1.0), std::domain_error);
    CHECK_THROWS_AS(inverse_erf(1.5), std::domain_error);
    CHECK_THROWS_AS(inverse_erf(-0.1), std::domain_error);
}

TEST_CASE("n_alpha_from_eps matches the Gaussian tail") {
    const double n = n_alpha_from_eps(1e-6);
    CHECK(std::erf(n / std::sqrt(2.0)) == doctest::Approx(1.0 - 1e-6).epsilon(1e-12));
    CHECK(n == doctest::Approx(4.89164).epsilon(1e-4));
}

TEST_CASE("golden section recovers a concave maximum") {
    auto f = [](double x) { return -(x - 0.7) * (x - 0.7); };
    const ScalarMax m = golden_section_max(f, 0.0, 2.0);
    CHECK(m.x == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(m.value == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("golden section keeps the best endpoint") {
    auto f = [](double x) { return x; };
    const ScalarMax m = golden_section_max(f, 0.0, 1.0);
    CHECK(m.value == doctest::Approx(1.0).epsilon(1e-9));
}
