#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace ppmqkd {

/// Entangled-pair waveform parameters: pump coherence time, pair correlation
/// time, and the long-short interferometer delay. The pump center frequency
/// is carried for documentation only; it enters the state solely as a phase
/// and never numerically.
struct BiphotonParams {
    double sigma_coh_s = 1e-6;
    double sigma_cor_s = 9.4e-13;
    double delta_t_s = 794e-12;
    double omega_pump_rad_s = 0.0;

    void validate() const {
        if (!(sigma_cor_s > 0.0) || !(sigma_coh_s > sigma_cor_s))
            throw std::invalid_argument("BiphotonParams: need sigma_coh > sigma_cor > 0");
        if (!(delta_t_s > 0.0))
            throw std::invalid_argument("BiphotonParams: delta_t must be > 0");
    }
};

/// Symmetric 2x2 covariance block for one quadrature type across the two
/// parties. Alongside the raw entries it caches the determinant and the
/// variance-minus-covariance differences, each maintained in factored form by
/// the constructors and transforms so that near-singular blocks keep full
/// relative accuracy.
struct Block2 {
    double var_a = 0.0;
    double var_b = 0.0;
    double cov = 0.0;
    double det = 0.0;     ///< var_a * var_b - cov^2
    double diff_a = 0.0;  ///< var_a - cov
    double diff_b = 0.0;  ///< var_b - cov

    static Block2 from_entries(double va, double vb, double c);
};

/// Two-party time-frequency covariance matrix in block form. Blocks are
/// diagonal in the (time, frequency) quadratures; gamma_AB = gamma_BA. Time
/// entries are in s^2, frequency entries in rad^2/s^2. Frequency covariances
/// are stored in the sign convention in which the unperturbed pair has
/// positive entries in both blocks.
struct Tfcm {
    Block2 time;
    Block2 freq;

    double t_var_a() const { return time.var_a; }
    double t_var_b() const { return time.var_b; }
    double t_cov() const { return time.cov; }
    double w_var_a() const { return freq.var_a; }
    double w_var_b() const { return freq.var_b; }
    double w_cov() const { return freq.cov; }

    /// <(w_A - w_B)^2>, the statistic certified by interferometric visibility.
    double omega_diff_sq() const { return freq.diff_a + freq.diff_b; }

    /// Generic constructor from raw entries (factored caches computed
    /// directly; intended for tests and externally supplied matrices).
    static Tfcm from_entries(double t_var_a, double t_var_b, double t_cov,
                             double w_var_a, double w_var_b, double w_cov);
};

/// Channel disturbance acting on the pair: correlation loss fractions and
/// excess-noise fractions, split by quadrature.
struct Disturbance {
    double eta_t = 0.0;
    double eta_w = 0.0;
    double eps_t = 0.0;
    double eps_w = 0.0;

    void validate() const {
        if (!(eta_t >= 0.0 && eta_t <= 1.0 && eta_w >= 0.0 && eta_w <= 1.0))
            throw std::invalid_argument("Disturbance: loss fractions must be in [0, 1]");
        if (!(eps_t >= 0.0 && eps_w >= 0.0))
            throw std::invalid_argument("Disturbance: excess noise must be >= 0");
    }
};

/// A visibility measurement against its theoretical value, with the sample
/// count and failure probability used for the finite-sample correction.
struct VisibilityMeasurement {
    double v_measured = 1.0;
    double v_theory = 1.0;
    long m_samples = 100;
    double eps_pe = 1e-5;

    void validate() const {
        if (!(v_measured >= 0.0 && v_measured <= 1.0))
            throw std::invalid_argument("VisibilityMeasurement: v_measured must be in [0, 1]");
        if (!(v_theory > 0.0 && v_theory <= 1.0))
            throw std::invalid_argument("VisibilityMeasurement: v_theory must be in (0, 1]");
        if (m_samples < 2)
            throw std::invalid_argument("VisibilityMeasurement: m_samples must be >= 2");
        if (!(eps_pe > 0.0 && eps_pe < 1.0))
            throw std::invalid_argument("VisibilityMeasurement: eps_pe must be in (0, 1)");
    }
};

/// Worst-case replacements for the time side of the matrix, which visibility
/// cannot certify: Bob's time variance is widened to the frame-integrated
/// value and the residual time spread between the parties is pinned to the
/// detector timing jitter.
struct TimeAssumptions {
    double bob_time_variance_s2 = 0.0;    ///< e.g. T_f^2 / 12
    double alice_time_variance_s2 = -1.0; ///< < 0 means "same as Bob"
    double jitter_rms_s = 30e-12;

    enum class CovRule {
        difference,   ///< <(t_A - t_B)^2> = jitter^2 (requires equal variances)
        conditional   ///< Var(t_B | t_A) = jitter^2
    };
    CovRule cov_rule = CovRule::difference;

    double alice_variance() const {
        return alice_time_variance_s2 < 0.0 ? bob_time_variance_s2 : alice_time_variance_s2;
    }
};

struct SymplecticQuantities {
    double i1 = 0.0;  ///< det gamma_AA
    double i2 = 0.0;  ///< det gamma_BB
    double i3 = 0.0;  ///< det gamma_AB
    double i4 = 0.0;  ///< det of the full matrix
    double d_plus = 0.0;
    double d_minus = 0.0;
    bool physical = true;  ///< d_minus >= 1/2 within tolerance
};

struct HolevoSupResult {
    double chi_bits = 0.0;
    double eta_w = 0.0;
    double eps_w = 0.0;
    bool feasible = true;        ///< false when no physical point exists
    std::string status;
};

/// Covariance matrix of the unperturbed pair. Rejects sigma_cor >= 2 sigma_coh
/// (degenerate covariance signs).
Tfcm baseline_tfcm(const BiphotonParams& p);

/// Scales the cross block by (1 - eta) and Bob's block by (1 + eps) per
/// quadrature; Alice's block is preserved exactly.
Tfcm apply_disturbance(const Tfcm& t0, const Disturbance& d);

/// Replaces the time block by the worst-case assumptions. Frequency entries
/// are untouched.
Tfcm apply_time_assumptions(const Tfcm& t, const TimeAssumptions& ta);

/// V = exp(-<(w_A - w_B)^2> dT^2 / 2) for Gaussian statistics.
double franson_visibility(const Tfcm& t, double delta_t_s);

/// Allowed change of the frequency variance/covariance combination implied by
/// a visibility deficit: 2 (V_th - V) / dT^2, clamped at 0.
double disturbance_budget(const VisibilityMeasurement& v, double delta_t_s);

/// Symplectic invariants and eigenvalues of the two-party matrix.
SymplecticQuantities symplectic_quantities(const Tfcm& t);

/// f(d) = (d + 1/2) log2(d + 1/2) - (d - 1/2) log2(d - 1/2).
/// Rejects d < 1/2 - 1e-9.
double entropy_f(double d);

/// S(rho_AB) = f(d+) + f(d-).
double joint_entropy(const Tfcm& t);

/// S(rho_B | t_A) = f(sqrt(det of Bob's covariance conditioned on Alice's
/// time measurement)).
double conditional_entropy_given_ta(const Tfcm& t);

/// chi = S(rho_AB) - S(rho_B | t_A), clamped at 0.
double holevo_chi(const Tfcm& t);

/// Supremum of chi over frequency disturbances (eta_w, eps_w) obeying
/// eps_w * <w_B^2>_0 + 2 eta_w * <w_A w_B>_0 <= budget, with the time
/// assumptions applied to every candidate. Boundary line search plus a dense
/// feasibility grid; the larger of the two is returned.
HolevoSupResult holevo_sup(const Tfcm& t0, double budget, const TimeAssumptions& ta,
                           int grid_n = 200);

/// Finite-sample upper bound on a measured mean-square statistic:
/// x * (1 + (2 / sqrt(m)) * inverse_erf(1 - eps_pe)).
double finite_key_frequency_bound(double omega_diff_sq, long m, double eps_pe);

/// Largest pump coherence time for which the time-assumption-overridden
/// unperturbed state stays physical; used to cap configured coherence times
/// (frame switching truncates the pair's joint temporal envelope).
double max_physical_sigma_coh(const BiphotonParams& p, const TimeAssumptions& ta);

} // namespace ppmqkd
