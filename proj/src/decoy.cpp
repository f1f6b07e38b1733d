#include "ppmqkd/decoy.hpp"

#include "ppmqkd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ppmqkd {

double DecoyConfig::resolved_n_alpha() const {
    if (n_alpha >= 0.0) return n_alpha;
    return n_alpha_from_eps(eps_decoy);
}

std::pair<double, double> partition_decoys(const DecoyConfig& cfg, double mu) {
    const int f1 = cfg.f1_bins <= 0 ? DecoyConfig::default_f1(cfg.n_bins) : cfg.f1_bins;
    const int f2 = cfg.f2_bins <= 0 ? DecoyConfig::default_f2(cfg.n_bins) : cfg.f2_bins;
    if (f2 < 1)
        throw std::invalid_argument("partition_decoys: second subgroup must be nonempty");
    if (!(f2 < f1 && f1 <= cfg.n_bins))
        throw std::invalid_argument("partition_decoys: need 1 <= f2_bins < f1_bins <= n_bins");
    if (!(cfg.nu_bin > 0.0))
        throw std::invalid_argument("partition_decoys: nu_bin must be > 0");
    const double nu1 = f1 * cfg.nu_bin;
    const double nu2 = f2 * cfg.nu_bin;
    if (!(nu2 < nu1))
        throw std::invalid_argument("partition_decoys: nu2 < nu1 violated");
    if (!(nu1 + nu2 < mu))
        throw std::invalid_argument("partition_decoys: nu1 + nu2 < mu violated");
    return {nu1, nu2};
}

double y0_lower(double q_nu1, double q_nu2, double nu1, double nu2) {
    if (!(nu1 > nu2 && nu2 >= 0.0))
        throw std::invalid_argument("y0_lower: need nu1 > nu2 >= 0");
    const double raw = (nu1 * q_nu2 * std::exp(nu2) - nu2 * q_nu1 * std::exp(nu1)) / (nu1 - nu2);
    return std::clamp(raw, 0.0, 1.0);
}

double y1_lower(double q_mu, double q_nu1, double q_nu2,
                double mu, double nu1, double nu2, double y0_low) {
    const double denom = mu * nu1 - mu * nu2 - nu1 * nu1 + nu2 * nu2;
    if (!(denom > 0.0))
        throw std::invalid_argument("y1_lower: decoy conditions violated (denominator <= 0)");
    const double multi = (nu1 * nu1 - nu2 * nu2) / (mu * mu) * (q_mu * std::exp(mu) - y0_low);
    const double raw = mu / denom *
                       (q_nu1 * std::exp(nu1) - q_nu2 * std::exp(nu2) - multi);
    return std::clamp(raw, 0.0, 1.0);
}

double q1_lower(double mu, double y1_low) {
    if (!(mu > 0.0)) throw std::invalid_argument("q1_lower: mu must be > 0");
    return mu * std::exp(-mu) * y1_low;
}

double single_photon_freq_bound(double q_nu, double omega_diff_sq,
                                double y1_low, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("single_photon_freq_bound: nu must be > 0");
    if (!(y1_low > 0.0))
        throw std::runtime_error("single_photon_freq_bound: decoy estimation failed (y1_low = 0)");
    return q_nu * omega_diff_sq / (y1_low * nu * std::exp(-nu));
}

std::pair<double, double> gain_fluctuation_bounds(double q, std::uint64_t n_frames,
                                                  double n_alpha, bool* low_statistics) {
    if (!(q * static_cast<double>(n_frames) > 0.0))
        throw std::invalid_argument("gain_fluctuation_bounds: n_frames * Q must be > 0");
    const double expected = static_cast<double>(n_frames) * q;
    if (low_statistics) *low_statistics = expected < 1.0;
    const double rel = n_alpha / std::sqrt(expected);
    const double lower = std::max(0.0, q * (1.0 - rel));
    const double upper = std::min(1.0, q * (1.0 + rel));
    return {lower, upper};
}

namespace {

// Extends a subgroup gain measured over f bins to the whole N-bin frame
// window by appending the no-background probability of the remaining gates.
// Puts all intensities on a common background yield so the decoy identities
// hold with a single Y0.
double harmonize_background(double q, int f_bins, int n_bins, double dark_per_gate) {
    if (dark_per_gate <= 0.0 || f_bins >= n_bins) return q;
    const double extra = static_cast<double>(n_bins - f_bins);
    const double no_click = (1.0 - q) * std::pow(1.0 - dark_per_gate, extra);
    return std::clamp(1.0 - no_click, 0.0, 1.0);
}

} // namespace

DecoyEstimate decoy_estimate(const DecoyObservables& obs, const DecoyConfig& cfg, double mu) {
    DecoyEstimate est;
    auto [nu1, nu2] = partition_decoys(cfg, mu);
    est.nu1 = nu1;
    est.nu2 = nu2;
    const double na = cfg.resolved_n_alpha();
    est.n_alpha_used = na;
    const int f1 = cfg.f1_bins <= 0 ? DecoyConfig::default_f1(cfg.n_bins) : cfg.f1_bins;
    const int f2 = cfg.f2_bins <= 0 ? DecoyConfig::default_f2(cfg.n_bins) : cfg.f2_bins;

    const double q1h = harmonize_background(obs.q_nu1, f1, cfg.n_bins, cfg.dark_prob_per_gate);
    const double q2h = harmonize_background(obs.q_nu2, f2, cfg.n_bins, cfg.dark_prob_per_gate);

    bool low_stats = false;
    auto envelope = [&](double q, std::uint64_t n) {
        if (na == 0.0 || q <= 0.0) return std::pair<double, double>{q, q};
        bool flag = false;
        auto lim = gain_fluctuation_bounds(q, n, na, &flag);
        low_stats = low_stats || flag;
        return lim;
    };

    const auto [q_nu1_lo, q_nu1_up] = envelope(q1h, obs.n_nu1);
    const auto [q_nu2_lo, q_nu2_up] = envelope(q2h, obs.n_nu2);
    const auto [q_mu_lo, q_mu_up] = envelope(obs.q_mu, obs.n_mu);
    (void)q_nu2_lo;
    (void)q_mu_lo;

    if (low_stats)
        est.warnings.push_back("fluctuation bounds rest on fewer than one expected event");

    // Worst-case composition: every envelope replacement below weakens the
    // final single-photon bound. Inside the background estimate that means
    // flipping directions relative to the yield formula.
    est.y0_low = y0_lower(q_nu1_up, q_nu2_lo, nu1, nu2);
    est.y1_low = y1_lower(q_mu_up, q_nu1_lo, q_nu2_up, mu, nu1, nu2, est.y0_low);
    est.q1_low = q1_lower(mu, est.y1_low);

    const double nu = cfg.n_bins * cfg.nu_bin;
    double q_nu_full = obs.q_nu_full >= 0.0 ? obs.q_nu_full : (obs.q_nu1 + obs.q_nu2);
    const std::uint64_t n_nu_full = obs.q_nu_full >= 0.0 ? obs.n_nu_full
                                                         : std::min(obs.n_nu1, obs.n_nu2);
    const auto [q_full_lo, q_full_up] = envelope(q_nu_full, n_nu_full);
    (void)q_full_lo;

    if (est.y1_low <= 0.0) {
        est.estimation_failed = true;
        est.freq_bound = 0.0;
        est.warnings.push_back("decoy estimation failed: y1_low = 0, key extraction must abort");
        return est;
    }
    est.freq_bound = single_photon_freq_bound(q_full_up, obs.omega_diff_sq, est.y1_low, nu);
    return est;
}

} // namespace ppmqkd
