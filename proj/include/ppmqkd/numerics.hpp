#pragma once

#include <functional>

namespace ppmqkd {

/// x * log2(x) with the continuity convention 0 * log2(0) = 0.
double xlog2x(double x);

/// Inverse of erf on [0, 1). Newton iteration refined to |erf(x) - y| <= 1e-14.
/// Throws std::domain_error for y outside [0, 1).
double inverse_erf(double y);

/// Standard-deviation multiplier equivalent to a one-sided Gaussian failure
/// probability eps: n_alpha = sqrt(2) * inverse_erf(1 - eps).
double n_alpha_from_eps(double eps);

struct ScalarMax {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section maximization on [lo, hi] for a unimodal objective.
/// Endpoints are always evaluated; the best probed point is returned.
ScalarMax golden_section_max(const std::function<double(double)>& f,
                             double lo, double hi, int iterations = 80);

} // namespace ppmqkd
