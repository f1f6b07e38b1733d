#include "ppmqkd/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace ppmqkd {

double xlog2x(double x) {
    if (x <= 0.0) return 0.0;
    return x * std::log2(x);
}

double inverse_erf(double y) {
    if (!(y >= 0.0) || y >= 1.0) {
        throw std::domain_error("inverse_erf: argument must lie in [0, 1)");
    }
    if (y == 0.0) return 0.0;

    // Initial guess from the complementary tail, then Newton steps with
    // bisection guards. d/dx erf(x) = 2/sqrt(pi) * exp(-x^2).
    double lo = 0.0;
    double hi = 1.0;
    while (std::erf(hi) < y) hi *= 2.0;
    double x = std::sqrt(-std::log1p(-y));
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

    constexpr double two_over_sqrt_pi = 1.1283791670955126;
    for (int i = 0; i < 200; ++i) {
        const double err = std::erf(x) - y;
        if (err > 0.0) hi = x; else lo = x;
        if (std::abs(err) <= 1e-15 * (1.0 + y)) break;
        const double deriv = two_over_sqrt_pi * std::exp(-x * x);
        double step = err / deriv;
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return x;
}

double n_alpha_from_eps(double eps) {
    if (!(eps > 0.0) || eps >= 1.0) {
        throw std::domain_error("n_alpha_from_eps: eps must lie in (0, 1)");
    }
    return std::sqrt(2.0) * inverse_erf(1.0 - eps);
}

ScalarMax golden_section_max(const std::function<double(double)>& f,
                             double lo, double hi, int iterations) {
    if (hi < lo) std::swap(lo, hi);
    constexpr double inv_phi = 0.6180339887498949;

    ScalarMax best{lo, f(lo)};
    auto consider = [&](double x, double v) {
        if (v > best.value) best = ScalarMax{x, v};
    };
    consider(hi, f(hi));
    if (hi == lo) return best;

    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    consider(x1, f1);
    consider(x2, f2);
    for (int i = 0; i < iterations; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
            consider(x2, f2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
            consider(x1, f1);
        }
        if (b - a <= 1e-15 * (std::abs(a) + std::abs(b) + 1e-300)) break;
    }
    return best;
}

} // namespace ppmqkd
