#pragma once

#include "ppmqkd/channel_model.hpp"
#include "ppmqkd/decoy.hpp"
#include "ppmqkd/holevo.hpp"
#include "ppmqkd/postprocess.hpp"
#include "ppmqkd/ppm_sim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ppmqkd {

/// Knobs of the security-side model that the protocol does not measure
/// directly: the frame-integrated time variances (as a fraction of the frame
/// duration, RMS), the pump-coherence cap, and how the measured visibility is
/// produced from the configured ratio.
struct HolevoModelConfig {
    double bob_time_rms_fraction = 0.28867513459481287;   ///< 1/sqrt(12)
    double alice_time_rms_fraction = -1.0;                ///< < 0: same as Bob
    double pump_coherence_fraction = -1.0;  ///< sigma_coh cap as a fraction of t_frame;
                                            ///< < 0 means "largest physical value"
    double visibility_ratio = 0.997;        ///< V / V_th
    long m_samples = 100;
    double eps_pe = 1e-5;
    bool car_degradation = false;  ///< degrade V with distance via the coincidence model
    bool delta_t_equals_frame = false;  ///< use dT = t_frame instead of the configured delay
};

enum class EvalMode { analytic, montecarlo, both };

/// Closed-form per-path channel quantities used by the analytic pipeline and
/// as the oracle for simulator checks. Gains use the exact yield form; the
/// per-gate noise folds the dark probability with the steady-state afterpulse
/// rate.
struct AnalyticChannel {
    double eta_fiber = 1.0;
    double eta_key = 0.0;    ///< per in-mode photon, key path
    double eta_fr = 0.0;     ///< per in-mode photon, franson path
    double eta_alice = 0.0;  ///< per in-mode idler photon, Alice side
    double g_mode = 1.0;     ///< gate duty factor thinning the cw pair intensity
    double y0_key = 0.0, y0_fr = 0.0, y0_alice = 0.0;
    double noise_per_gate_key = 0.0;  ///< dark + afterpulse average
    double q_mu_key = 0.0, q_nu_key = 0.0, q_nu1_key = 0.0, q_nu2_key = 0.0;
    double q_mu_fr = 0.0, q_nu_fr = 0.0, q_nu1_fr = 0.0, q_nu2_fr = 0.0;
    double q_coinc_nu = 0.0;
    double y1_alice = 0.0;  ///< trusted local single-pair yield on Alice's side
    double symbol_error = 0.0;
};

/// One evaluated parameter point, with every intermediate quantity needed to
/// recompute the rate from the report alone.
struct KeyRateReport {
    int n_bins = 0;
    double distance_km = 0.0;
    double q_mu = 0.0;
    double q1_low = 0.0;
    double chi_e = 0.0;
    double chi1_up = 0.0;
    double i_ab = 0.0;
    double pie = 0.0;       ///< clamped at 0
    double pie_raw = 0.0;
    double key_rate_bps = 0.0;  ///< clamped at 0
    double key_rate_raw_bps = 0.0;
    double photon_rate_hz = 0.0;
    std::uint64_t seed = 0;
    std::string mode;
    std::string error;

    // Diagnostics and self-check inputs.
    double beta = 0.0;
    double n_r_bits = 0.0;
    double frame_rate_eff_hz = 0.0;
    double v_theory = 0.0;
    double v_measured = 0.0;
    double budget = 0.0;
    double budget_single_photon = 0.0;
    double sigma_coh_eff_s = 0.0;
    bool coherence_truncated = false;
    double symbol_error_rate = 0.0;
    double mu = 0.0;
    double eps_pe = 0.0, eps_decoy = 0.0, eps_ec = 0.0, eps_pa = 0.0, eps_bar = 0.0;
    bool self_check_ok = false;
    std::string cross_check;  ///< mode "both": analytic-vs-simulated gain comparison
};

/// Bundle of all per-point inputs.
struct PointInputs {
    FrameConfig frame;
    SourceParams source;
    ChannelParams channel;  ///< eta_b here is receiver optics before the split
    DetectorModel det_key;
    DetectorModel det_franson;
    DetectorModel det_alice;
    double split = 0.5;
    double alice_path_eta = 1.0;
    BiphotonParams biphoton;
    HolevoModelConfig holevo;
    DecoyConfig decoy;
    PaParams pa;
    EvalMode mode = EvalMode::analytic;
    std::uint64_t seed = 1;
    std::uint64_t mc_frames = 1'000'000;
    double session_seconds = 50.0;  ///< sizes finite-data envelopes in analytic mode
    int workers = 1;
};

/// I = log2 N + (1-e) log2(1-e) + e log2(e / (N-1)) for the N-ary symmetric
/// channel conditioned on a detection.
double mutual_information_analytic(int n_symbols, double error_prob);

/// Plug-in mutual information of a (sent, decoded) count matrix.
double mutual_information_empirical(const std::vector<std::uint64_t>& confusion, int n_symbols);

/// First-click symbol error probability for uniform per-gate noise n and
/// signal click probability p_sig at the encoded bin.
double symbol_error_first_click(int n_bins, double noise_per_gate, double p_signal_click);

struct PieResult {
    double raw = 0.0;
    double clamped = 0.0;
};
PieResult pie(double beta, double i_ab_bits, double chi_e_bits);

struct RateResult {
    double raw_bps = 0.0;
    double clamped_bps = 0.0;
};
/// R = R_f [ Q1 (n_R - chi1) - Q_mu (n_R - beta I_AB) ]; throws when
/// q1_low > q_mu (inconsistent bounds).
RateResult secret_key_rate(double frame_rate_hz, double q1_low, double n_r_bits,
                           double chi1_up_bits, double q_mu, double beta, double i_ab_bits);

AnalyticChannel compute_analytic_channel(const PointInputs& in);

KeyRateReport evaluate_point(const PointInputs& in);

std::vector<KeyRateReport> sweep_distance(const PointInputs& in, const std::vector<double>& km,
                                          int workers = 1);
std::vector<KeyRateReport> sweep_n(const PointInputs& in, const std::vector<int>& n_values,
                                   int workers = 1);
std::vector<KeyRateReport> sweep_mu(const PointInputs& in, const std::vector<double>& mu_values,
                                    int workers = 1);

struct MuOptimum {
    double mu = 0.0;
    KeyRateReport report;
    double bracket_lo = 0.0;  ///< plateau of mu values within 10% of the best rate
    double bracket_hi = 0.0;
    bool flat_objective = false;
};
MuOptimum optimize_mu(const PointInputs& in, double mu_lo, double mu_hi);

} // namespace ppmqkd
