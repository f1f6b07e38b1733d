#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ppmqkd {

/// Passive decoy configuration. An entangled-source frame of N bins yields
/// two nested bin windows, the first f1_bins and the first f2_bins of the
/// frame, giving decoy intensities nu1 = f1_bins * nu_bin and
/// nu2 = f2_bins * nu_bin. The confidence multiplier n_alpha can be given
/// directly or derived from a failure probability eps_decoy through the
/// Gaussian tail.
struct DecoyConfig {
    int n_bins = 8;
    int f1_bins = -1;  ///< <= 0: default window for n_bins
    int f2_bins = -1;
    double nu_bin = 0.005;  ///< in-mode (detectable) pairs per bin
    double n_alpha = -1.0;      ///< direct multiplier; < 0 means "derive from eps_decoy"
    double eps_decoy = 1e-6;
    double dark_prob_per_gate = 0.0;  ///< calibrated per-gate background, used to
                                      ///< put subgroup gains on a common background

    /// Half and quarter frames, capped so large frames keep the decoy
    /// intensities well below the signal intensity.
    static int default_f1(int n_bins) {
        const int f = n_bins / 2 > 2 ? n_bins / 2 : 2;
        return f > 128 ? 128 : f;
    }
    static int default_f2(int n_bins) {
        const int f = n_bins / 4 > 1 ? n_bins / 4 : 1;
        return f > 64 ? 64 : f;
    }
    double resolved_n_alpha() const;
};

/// Gains measured (or synthesized) per frame for the signal and the two decoy
/// subgroups, with the frame counts behind them, plus the measured
/// mean-squared frequency-difference statistic. q_nu_full is the whole-frame
/// entangled-source gain used by the single-photon frequency bound; when
/// negative it defaults to q_nu1 + q_nu2.
struct DecoyObservables {
    double q_mu = 0.0;
    double q_nu1 = 0.0;
    double q_nu2 = 0.0;
    std::uint64_t n_mu = 1;
    std::uint64_t n_nu1 = 1;
    std::uint64_t n_nu2 = 1;
    double omega_diff_sq = 0.0;
    double q_nu_full = -1.0;
    std::uint64_t n_nu_full = 1;
};

struct DecoyEstimate {
    double y0_low = 0.0;
    double y1_low = 0.0;
    double q1_low = 0.0;
    double freq_bound = 0.0;          ///< single-photon frequency-difference bound
    double nu1 = 0.0;
    double nu2 = 0.0;
    double n_alpha_used = 0.0;
    bool estimation_failed = false;   ///< y1_low collapsed to zero
    std::vector<std::string> warnings;
};

/// Validates decoy conditions and returns (nu1, nu2). Throws on violations of
/// 0 <= nu2 < nu1, nu1 + nu2 < mu, or an empty second subgroup.
std::pair<double, double> partition_decoys(const DecoyConfig& cfg, double mu);

/// max{(nu1 Q2 e^nu2 - nu2 Q1 e^nu1) / (nu1 - nu2), 0}, clamped to [0, 1].
double y0_lower(double q_nu1, double q_nu2, double nu1, double nu2);

/// Single-photon yield lower bound from the two decoy gains and the signal
/// gain. Throws if the decoy conditions make the denominator nonpositive.
double y1_lower(double q_mu, double q_nu1, double q_nu2,
                double mu, double nu1, double nu2, double y0_low);

/// Q1 >= mu e^(-mu) * Y1_low.
double q1_lower(double mu, double y1_low);

/// Upper bound on the single-photon mean-squared frequency difference:
/// q_nu * omega_diff_sq / (y1_low * nu * e^(-nu)).
/// Throws std::runtime_error when y1_low = 0 (estimation failed; the caller
/// must abort key extraction).
double single_photon_freq_bound(double q_nu, double omega_diff_sq,
                                double y1_low, double nu);

/// Q * (1 -+ n_alpha / sqrt(n_frames * Q)); lower bound clamped at 0.
/// Returns {lower, upper}. When n_frames * Q < 1 the bounds are meaningless;
/// a warning flag is reported through the optional out-parameter.
std::pair<double, double> gain_fluctuation_bounds(double q, std::uint64_t n_frames,
                                                  double n_alpha,
                                                  bool* low_statistics = nullptr);

/// Full worst-case composition: fluctuation envelopes applied in the
/// direction that weakens each bound, subgroup gains first harmonized to the
/// whole-frame background window using the calibrated dark probability.
DecoyEstimate decoy_estimate(const DecoyObservables& obs, const DecoyConfig& cfg, double mu);

} // namespace ppmqkd
