#include "ppmqkd/channel_model.hpp"

#include <algorithm>
#include <cmath>

namespace ppmqkd {

double system_transmissivity(const ChannelParams& p) {
    p.validate();
    return p.eta_b * std::pow(10.0, -p.alpha_db_per_km * p.length_km / 10.0);
}

double i_photon_efficiency(double eta, int i) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("i_photon_efficiency: eta must be in [0, 1]");
    if (i < 0)
        throw std::invalid_argument("i_photon_efficiency: i must be >= 0");
    if (i == 0) return 0.0;
    if (eta == 1.0) return 1.0;
    // 1 - (1-eta)^i via expm1 for accuracy at small eta.
    return -std::expm1(static_cast<double>(i) * std::log1p(-eta));
}

double yield_i(double y0, double eta_i_value, YieldForm form) {
    if (form == YieldForm::exact) {
        return y0 + eta_i_value - y0 * eta_i_value;
    }
    return std::min(1.0, y0 + eta_i_value);
}

double poisson_pmf(double mu, int i) {
    if (i < 0) return 0.0;
    return std::exp(-mu + static_cast<double>(i) * std::log(mu) -
                    std::lgamma(static_cast<double>(i) + 1.0));
}

double gain_i(double y_i, double mu, int i) {
    if (!(mu > 0.0)) throw std::invalid_argument("gain_i: mu must be > 0");
    if (y_i == 0.0) return 0.0;
    return y_i * poisson_pmf(mu, i);
}

double overall_gain(double y0, double eta, double mu) {
    const double q = y0 - std::expm1(-eta * mu);
    return std::min(1.0, q);
}

double overall_gain_series(double y0, double eta, double mu, YieldForm form, int max_i) {
    double q = 0.0;
    for (int i = 0; i <= max_i; ++i) {
        const double yi = yield_i(y0, i_photon_efficiency(eta, i), form);
        q += yi * poisson_pmf(mu, i);
    }
    return std::min(1.0, q);
}

double expected_count_rate(double t_frame_s, double p_os, double q_mu) {
    if (!(t_frame_s > 0.0))
        throw std::invalid_argument("expected_count_rate: frame duration must be > 0");
    return p_os * q_mu / t_frame_s;
}

} // namespace ppmqkd
