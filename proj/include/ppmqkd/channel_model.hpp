#pragma once

#include <stdexcept>

namespace ppmqkd {

/// Lossy-channel description. eta_b is the receiver-side transmissivity
/// (internal optics and detector efficiency folded in by the caller),
/// alpha the fiber loss coefficient in dB/km, y0 the background yield
/// (probability of a background detection per frame).
struct ChannelParams {
    double eta_b = 1.0;
    double alpha_db_per_km = 0.2;
    double length_km = 0.0;
    double y0 = 0.0;

    void validate() const {
        if (!(eta_b > 0.0 && eta_b <= 1.0))
            throw std::invalid_argument("ChannelParams: eta_b must be in (0, 1]");
        if (!(alpha_db_per_km >= 0.0))
            throw std::invalid_argument("ChannelParams: alpha must be >= 0");
        if (!(length_km >= 0.0))
            throw std::invalid_argument("ChannelParams: length_km must be >= 0");
        if (!(y0 >= 0.0 && y0 < 1.0))
            throw std::invalid_argument("ChannelParams: y0 must be in [0, 1)");
    }
};

/// Source intensities: mean photon number per occupied PPM bin (equals the
/// per-frame mean, one occupied bin per frame), mean pair number per bin of
/// the entangled source, and the per-frame probability of picking the PPM
/// source.
struct SourceParams {
    double mu_ppm = 0.5;
    double nu_bin = 0.005;
    double p_os = 0.7;

    void validate() const {
        if (!(mu_ppm > 0.0))
            throw std::invalid_argument("SourceParams: mu_ppm must be > 0");
        if (!(nu_bin > 0.0))
            throw std::invalid_argument("SourceParams: nu_bin must be > 0");
        if (!(p_os > 0.0 && p_os < 1.0))
            throw std::invalid_argument("SourceParams: p_os must be in (0, 1)");
    }
};

enum class YieldForm {
    exact,       ///< Y_i = Y0 + eta_i - Y0 * eta_i
    approximate  ///< Y_i = Y0 + eta_i (valid for small Y0, eta)
};

/// eta = eta_b * 10^(-alpha * l / 10)
double system_transmissivity(const ChannelParams& p);

/// eta_i = 1 - (1 - eta)^i, the chance at least one of i photons survives.
double i_photon_efficiency(double eta, int i);

/// Yield of the i-photon state given background y0 and efficiency eta_i.
double yield_i(double y0, double eta_i_value, YieldForm form = YieldForm::exact);

/// Q_i = Y_i * mu^i * e^(-mu) / i!
double gain_i(double y_i, double mu, int i);

/// Closed-form overall gain Q_mu = y0 + 1 - e^(-eta * mu).
double overall_gain(double y0, double eta, double mu);

/// Overall gain as a truncated Poisson series over per-photon-number yields.
/// Truncation index chosen so the neglected tail mass is below 1e-15.
double overall_gain_series(double y0, double eta, double mu,
                           YieldForm form = YieldForm::exact, int max_i = 60);

/// Expected detection rate for the PPM source: N_c = p_os * q_mu / t_frame.
double expected_count_rate(double t_frame_s, double p_os, double q_mu);

/// Poisson probability mass mu^i e^(-mu) / i!, evaluated stably.
double poisson_pmf(double mu, int i);

} // namespace ppmqkd
