#include "ppmqkd/keyrate.hpp"

#include "ppmqkd/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <sstream>

namespace ppmqkd {

double mutual_information_analytic(int n_symbols, double error_prob) {
    if (n_symbols < 2)
        throw std::invalid_argument("mutual_information_analytic: need at least 2 symbols");
    const double n = static_cast<double>(n_symbols);
    if (!(error_prob >= 0.0 && error_prob <= 1.0 - 1.0 / n + 1e-12))
        throw std::invalid_argument("mutual_information_analytic: error probability out of range");
    const double e = std::clamp(error_prob, 0.0, 1.0 - 1.0 / n);
    double i = std::log2(n) + xlog2x(1.0 - e);
    if (e > 0.0) i += e * std::log2(e / (n - 1.0));
    return std::max(0.0, i);
}

double mutual_information_empirical(const std::vector<std::uint64_t>& confusion, int n_symbols) {
    const auto n = static_cast<std::size_t>(n_symbols);
    if (confusion.size() != n * n)
        throw std::invalid_argument("mutual_information_empirical: matrix size mismatch");
    std::uint64_t total = 0;
    for (auto c : confusion) total += c;
    if (total == 0)
        throw std::invalid_argument("mutual_information_empirical: need at least one count");

    std::vector<double> px(n, 0.0), py(n, 0.0);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            const double p = static_cast<double>(confusion[x * n + y]) / static_cast<double>(total);
            px[x] += p;
            py[y] += p;
        }
    double mi = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            const double p = static_cast<double>(confusion[x * n + y]) / static_cast<double>(total);
            if (p > 0.0) mi += p * std::log2(p / (px[x] * py[y]));
        }
    return std::max(0.0, mi);
}

double symbol_error_first_click(int n_bins, double noise_per_gate, double p_signal_click) {
    const double n = noise_per_gate;
    const double q_s = 1.0 - (1.0 - n) * (1.0 - p_signal_click);
    if (q_s <= 0.0) return 0.0;
    const double nb = static_cast<double>(n_bins);
    double mean_prefix;  // E_s[(1-n)^s] over the uniform symbol position
    if (n > 0.0) {
        mean_prefix = -std::expm1(nb * std::log1p(-n)) / (nb * n);
    } else {
        mean_prefix = 1.0;
    }
    const double p_correct = q_s * mean_prefix;
    const double p_detect = 1.0 - std::pow(1.0 - n, nb) * (1.0 - p_signal_click);
    if (p_detect <= 0.0) return 0.0;
    return std::clamp(1.0 - p_correct / p_detect, 0.0, 1.0);
}

PieResult pie(double beta, double i_ab_bits, double chi_e_bits) {
    if (!(beta >= 0.0 && i_ab_bits >= 0.0 && chi_e_bits >= 0.0))
        throw std::invalid_argument("pie: inputs must be nonnegative");
    PieResult r;
    r.raw = beta * i_ab_bits - chi_e_bits;
    r.clamped = std::max(0.0, r.raw);
    return r;
}

RateResult secret_key_rate(double frame_rate_hz, double q1_low, double n_r_bits,
                           double chi1_up_bits, double q_mu, double beta, double i_ab_bits) {
    if (q1_low > q_mu * (1.0 + 1e-12))
        throw std::invalid_argument("secret_key_rate: q1_low exceeds q_mu (inconsistent bounds)");
    if (n_r_bits + 1e-12 < beta * i_ab_bits)
        throw std::invalid_argument("secret_key_rate: n_R < beta * I_AB");
    RateResult r;
    r.raw_bps = frame_rate_hz *
                (q1_low * (n_r_bits - chi1_up_bits) - q_mu * (n_r_bits - beta * i_ab_bits));
    r.clamped_bps = std::max(0.0, r.raw_bps);
    return r;
}

namespace {

double window_background(double dark_per_gate, int gates) {
    if (dark_per_gate <= 0.0) return 0.0;
    return -std::expm1(static_cast<double>(gates) * std::log1p(-dark_per_gate));
}

double gain_exact(double y0, double eta, double intensity) {
    return 1.0 - (1.0 - y0) * std::exp(-eta * intensity);
}

} // namespace

AnalyticChannel compute_analytic_channel(const PointInputs& in) {
    in.frame.validate();
    in.source.validate();
    in.channel.validate();
    AnalyticChannel ch;
    const int nb = in.frame.n_bins;
    const double tau = in.frame.tau_s;

    ch.eta_fiber = std::pow(10.0, -in.channel.alpha_db_per_km * in.channel.length_km / 10.0);
    const double eta_ch = in.channel.eta_b * ch.eta_fiber;

    // Aligned PPM pulses see the gates fully; the cw pair source is thinned
    // by the gate duty factor into an effective in-mode intensity, after
    // which all sources share one per-photon yield family.
    ch.eta_key = eta_ch * in.split * in.det_key.efficiency;
    ch.eta_fr = eta_ch * (1.0 - in.split) * in.det_franson.efficiency;
    ch.eta_alice = in.alice_path_eta * in.det_alice.efficiency;
    ch.g_mode = in.det_key.gate_width_s / tau;

    ch.y0_key = window_background(in.det_key.dark_prob_per_gate, nb);
    ch.y0_fr = window_background(in.det_franson.dark_prob_per_gate, nb);
    ch.y0_alice = window_background(in.det_alice.dark_prob_per_gate, nb);

    const double mu = in.source.mu_ppm;
    const double nu = ch.g_mode * in.source.nu_bin * nb;
    const int f1 = in.decoy.f1_bins > 0 ? in.decoy.f1_bins : DecoyConfig::default_f1(nb);
    const int f2 = in.decoy.f2_bins > 0 ? in.decoy.f2_bins : DecoyConfig::default_f2(nb);
    const double nu1 = ch.g_mode * in.source.nu_bin * f1;
    const double nu2 = ch.g_mode * in.source.nu_bin * f2;

    // Steady-state afterpulse contribution folded into the per-gate noise;
    // two fixed-point passes are ample at percent-level afterpulse rates.
    double ap_per_gate = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const double noise = std::min(1.0, in.det_key.dark_prob_per_gate + ap_per_gate);
        const double y0_eff = window_background(noise, nb);
        const double q_ase = gain_exact(y0_eff, ch.eta_key, mu);
        const double q_spdc = gain_exact(y0_eff, ch.eta_key, nu);
        const double clicks_per_frame = in.source.p_os * q_ase + (1.0 - in.source.p_os) * q_spdc;
        ap_per_gate = in.det_key.afterpulse_prob * clicks_per_frame / static_cast<double>(nb);
    }
    ch.noise_per_gate_key = in.det_key.dark_prob_per_gate + ap_per_gate;
    const double y0_key_eff = window_background(ch.noise_per_gate_key, nb);

    ch.q_mu_key = gain_exact(y0_key_eff, ch.eta_key, mu);
    ch.q_nu_key = gain_exact(y0_key_eff, ch.eta_key, nu);
    ch.q_nu1_key = gain_exact(window_background(ch.noise_per_gate_key, f1), ch.eta_key, nu1);
    ch.q_nu2_key = gain_exact(window_background(ch.noise_per_gate_key, f2), ch.eta_key, nu2);

    ch.q_mu_fr = gain_exact(ch.y0_fr, ch.eta_fr, mu);
    ch.q_nu_fr = gain_exact(ch.y0_fr, ch.eta_fr, nu);
    ch.q_nu1_fr = gain_exact(window_background(in.det_franson.dark_prob_per_gate, f1),
                             ch.eta_fr, nu1);
    ch.q_nu2_fr = gain_exact(window_background(in.det_franson.dark_prob_per_gate, f2),
                             ch.eta_fr, nu2);

    // Coincidence gain between Alice's idler detector and Bob's franson
    // output, as an in-mode pair-number series.
    double qc = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double a_i = yield_i(ch.y0_alice, i_photon_efficiency(ch.eta_alice, i));
        const double b_i = yield_i(ch.y0_fr, i_photon_efficiency(ch.eta_fr, i));
        qc += poisson_pmf(nu, i) * a_i * b_i;
    }
    ch.q_coinc_nu = qc;
    ch.y1_alice = yield_i(ch.y0_alice, ch.eta_alice);

    const double p_sig = -std::expm1(-ch.eta_key * mu);
    ch.symbol_error = symbol_error_first_click(nb, ch.noise_per_gate_key, p_sig);
    return ch;
}

namespace {

struct SecurityContext {
    Tfcm baseline;
    TimeAssumptions ta;
    double delta_t = 0.0;
    double sigma_coh_eff = 0.0;
    bool truncated = false;
    double v_theory = 0.0;
};

SecurityContext build_security_context(const PointInputs& in) {
    SecurityContext ctx;
    const double t_f = in.frame.t_frame_s();
    ctx.delta_t = in.holevo.delta_t_equals_frame ? t_f : in.biphoton.delta_t_s;

    const double bob_rms = in.holevo.bob_time_rms_fraction * t_f;
    ctx.ta.bob_time_variance_s2 = bob_rms * bob_rms;
    if (in.holevo.alice_time_rms_fraction >= 0.0) {
        const double a_rms = in.holevo.alice_time_rms_fraction * t_f;
        ctx.ta.alice_time_variance_s2 = a_rms * a_rms;
        ctx.ta.cov_rule = in.holevo.alice_time_rms_fraction == in.holevo.bob_time_rms_fraction
                              ? TimeAssumptions::CovRule::difference
                              : TimeAssumptions::CovRule::conditional;
    }
    ctx.ta.jitter_rms_s = in.det_key.jitter_rms_s;

    BiphotonParams bp = in.biphoton;
    bp.delta_t_s = ctx.delta_t;
    double sigma = bp.sigma_coh_s;
    if (in.holevo.pump_coherence_fraction > 0.0)
        sigma = std::min(sigma, in.holevo.pump_coherence_fraction * t_f);
    const double cap = max_physical_sigma_coh(bp, ctx.ta);
    if (cap <= 0.0)
        throw std::runtime_error("security model admits no physical pump coherence time "
                                 "(jitter too small for the frame time variance)");
    if (sigma > cap) sigma = cap;
    ctx.truncated = sigma < in.biphoton.sigma_coh_s;
    ctx.sigma_coh_eff = sigma;
    bp.sigma_coh_s = sigma;
    bp.validate();
    ctx.baseline = baseline_tfcm(bp);
    ctx.v_theory = franson_visibility(ctx.baseline, ctx.delta_t);
    return ctx;
}

struct Observations {
    DecoyObservables key;      ///< key-path gain family
    DecoyObservables franson;  ///< franson-path gain family
    double q_coinc = 0.0;
    std::uint64_t n_spdc = 1;
    double q_mu = 0.0;
    double i_ab = 0.0;
    double symbol_error = 0.0;
};

Observations observations_from_analytic(const PointInputs& in, const AnalyticChannel& ch) {
    Observations obs;
    const double total = in.frame.rate_hz() * in.session_seconds;
    const auto n_ase = static_cast<std::uint64_t>(std::max(1.0, total * in.source.p_os));
    const auto n_spdc = static_cast<std::uint64_t>(std::max(1.0, total * (1.0 - in.source.p_os)));

    obs.key.q_mu = ch.q_mu_key;
    obs.key.q_nu1 = ch.q_nu1_key;
    obs.key.q_nu2 = ch.q_nu2_key;
    obs.key.q_nu_full = ch.q_nu_key;
    obs.key.n_mu = n_ase;
    obs.key.n_nu1 = obs.key.n_nu2 = obs.key.n_nu_full = n_spdc;

    obs.franson.q_mu = ch.q_mu_fr;
    obs.franson.q_nu1 = ch.q_nu1_fr;
    obs.franson.q_nu2 = ch.q_nu2_fr;
    obs.franson.q_nu_full = ch.q_nu_fr;
    obs.franson.n_mu = n_ase;
    obs.franson.n_nu1 = obs.franson.n_nu2 = obs.franson.n_nu_full = n_spdc;

    obs.q_coinc = ch.q_coinc_nu;
    obs.n_spdc = n_spdc;
    obs.q_mu = ch.q_mu_key;
    obs.symbol_error = ch.symbol_error;
    obs.i_ab = mutual_information_analytic(in.frame.n_bins, ch.symbol_error);
    return obs;
}

Observations observations_from_stats(const EmpiricalStats& st) {
    Observations obs;
    obs.key.q_mu = st.q_mu_hat();
    obs.key.q_nu1 = st.q_nu1_hat();
    obs.key.q_nu2 = st.q_nu2_hat();
    obs.key.q_nu_full = st.q_nu_hat();
    obs.key.n_mu = std::max<std::uint64_t>(1, st.ase_frames);
    obs.key.n_nu1 = obs.key.n_nu2 = obs.key.n_nu_full = std::max<std::uint64_t>(1, st.spdc_frames);

    obs.franson.q_mu = st.q_mu_fr_hat();
    obs.franson.q_nu1 = st.q_nu1_fr_hat();
    obs.franson.q_nu2 = st.q_nu2_fr_hat();
    obs.franson.q_nu_full = st.q_nu_fr_hat();
    obs.franson.n_mu = obs.key.n_mu;
    obs.franson.n_nu1 = obs.franson.n_nu2 = obs.franson.n_nu_full = obs.key.n_nu1;

    obs.q_coinc = st.q_coinc_hat();
    obs.n_spdc = std::max<std::uint64_t>(1, st.spdc_frames);
    obs.q_mu = st.q_mu_hat();
    obs.symbol_error = st.symbol_error_rate();
    obs.i_ab = st.sifted_frames > 0 ? mutual_information_empirical(st.confusion, st.n_bins)
                                    : 0.0;
    return obs;
}

SimParams sim_params_from_inputs(const PointInputs& in) {
    SimParams sp;
    sp.frame = in.frame;
    sp.source = in.source;
    sp.channel_eta = in.channel.eta_b *
                     std::pow(10.0, -in.channel.alpha_db_per_km * in.channel.length_km / 10.0);
    sp.split = in.split;
    sp.det_key = in.det_key;
    sp.det_franson = in.det_franson;
    sp.det_alice = in.det_alice;
    sp.alice_path_eta = in.alice_path_eta;
    sp.decoy_f1_bins = in.decoy.f1_bins;
    sp.decoy_f2_bins = in.decoy.f2_bins;
    return sp;
}

} // namespace

KeyRateReport evaluate_point(const PointInputs& in) {
    KeyRateReport rep;
    rep.n_bins = in.frame.n_bins;
    rep.distance_km = in.channel.length_km;
    rep.seed = in.seed;
    rep.mode = in.mode == EvalMode::analytic ? "analytic"
               : in.mode == EvalMode::montecarlo ? "montecarlo" : "both";
    rep.beta = in.pa.beta;
    rep.mu = in.source.mu_ppm;
    rep.eps_pe = in.holevo.eps_pe;
    rep.eps_decoy = in.decoy.eps_decoy;
    rep.eps_ec = in.pa.eps_ec;
    rep.eps_pa = in.pa.eps_pa;
    rep.eps_bar = in.pa.eps_bar;

    try {
        in.pa.validate();
        const AnalyticChannel ch = compute_analytic_channel(in);

        Observations obs;
        if (in.mode == EvalMode::analytic) {
            obs = observations_from_analytic(in, ch);
        } else {
            const EmpiricalStats st =
                run_simulation(sim_params_from_inputs(in), in.mc_frames, in.seed, in.workers);
            obs = observations_from_stats(st);
            if (in.mode == EvalMode::both) {
                const double sigma =
                    std::sqrt(ch.q_mu_key * (1.0 - ch.q_mu_key) /
                              static_cast<double>(std::max<std::uint64_t>(1, st.ase_frames)));
                const double dev = std::abs(st.q_mu_hat() - ch.q_mu_key);
                std::ostringstream cc;
                cc << "gain deviation " << dev << " vs 5 sigma " << 5.0 * sigma
                   << (dev <= 5.0 * sigma ? " (ok)" : " (MISMATCH)");
                rep.cross_check = cc.str();
            }
        }

        const SecurityContext ctx = build_security_context(in);
        rep.v_theory = ctx.v_theory;
        rep.sigma_coh_eff_s = ctx.sigma_coh_eff;
        rep.coherence_truncated = ctx.truncated;

        double v_meas = in.holevo.visibility_ratio * ctx.v_theory;
        if (in.holevo.car_degradation) {
            DetectorModel fr = in.det_franson;
            const double eta_now = in.channel.eta_b * ch.eta_fiber;
            const double car_now = estimate_car(in.frame, in.source, eta_now, fr);
            const double car_ref = estimate_car(in.frame, in.source, in.channel.eta_b, fr);
            const double factor_now = car_now > 1.0 ? (car_now - 1.0) / (car_now + 1.0) : 0.0;
            const double factor_ref = car_ref > 1.0 ? (car_ref - 1.0) / (car_ref + 1.0) : 1.0;
            if (factor_ref > 0.0) v_meas *= factor_now / factor_ref;
        }
        rep.v_measured = v_meas;

        VisibilityMeasurement vm;
        vm.v_measured = std::min(v_meas, ctx.v_theory);
        vm.v_theory = ctx.v_theory;
        vm.m_samples = in.holevo.m_samples;
        vm.eps_pe = in.holevo.eps_pe;
        const double b_raw = disturbance_budget(vm, ctx.delta_t);
        const double b_fin =
            finite_key_frequency_bound(b_raw, in.holevo.m_samples, in.holevo.eps_pe);
        rep.budget = b_fin;

        const HolevoSupResult sup_e = holevo_sup(ctx.baseline, b_fin, ctx.ta);
        if (!sup_e.feasible) throw std::runtime_error("holevo_sup: " + sup_e.status);
        rep.chi_e = sup_e.chi_bits;

        rep.q_mu = obs.q_mu;
        rep.i_ab = obs.i_ab;
        rep.symbol_error_rate = obs.symbol_error;
        const double t_f = in.frame.t_frame_s();
        rep.photon_rate_hz = expected_count_rate(t_f, in.source.p_os, obs.q_mu);
        rep.frame_rate_eff_hz = in.frame.rate_hz() * in.source.p_os;
        rep.n_r_bits = static_cast<double>(in.frame.bits_per_symbol());

        // Decoy estimation on the key-path gain family; subgroup intensities
        // are the in-mode ones (gate duty factor folded in).
        DecoyConfig dc = in.decoy;
        dc.n_bins = in.frame.n_bins;
        if (dc.f1_bins <= 0) dc.f1_bins = DecoyConfig::default_f1(in.frame.n_bins);
        if (dc.f2_bins <= 0) dc.f2_bins = DecoyConfig::default_f2(in.frame.n_bins);
        dc.nu_bin = ch.g_mode * in.source.nu_bin;
        dc.dark_prob_per_gate = ch.noise_per_gate_key;
        const DecoyEstimate de_key = decoy_estimate(obs.key, dc, in.source.mu_ppm);
        rep.q1_low = std::min(de_key.q1_low, obs.q_mu);

        if (de_key.estimation_failed || de_key.y1_low <= 0.0) {
            rep.error = "decoy estimation failed: single-photon yield bound is zero";
            const PieResult p0 = pie(in.pa.beta, obs.i_ab, rep.chi_e);
            rep.pie_raw = p0.raw;
            rep.pie = p0.clamped;
            rep.key_rate_bps = 0.0;
            rep.key_rate_raw_bps = 0.0;
            return rep;
        }

        // Single-photon frequency bound on the coincidence family: Alice's
        // trusted side times the franson-path decoy bound of Bob's side.
        DecoyConfig dc_fr = dc;
        dc_fr.dark_prob_per_gate = in.det_franson.dark_prob_per_gate;
        const DecoyEstimate de_fr = decoy_estimate(obs.franson, dc_fr, in.source.mu_ppm);

        const double omega0 = ctx.baseline.omega_diff_sq();
        const double nu = ch.g_mode * in.source.nu_bin * in.frame.n_bins;
        double budget1 = 0.0;
        if (de_fr.y1_low > 0.0 && ch.y1_alice > 0.0) {
            double q_coinc_up = obs.q_coinc;
            const double na = dc.resolved_n_alpha();
            if (na > 0.0 && obs.q_coinc > 0.0) {
                q_coinc_up = gain_fluctuation_bounds(obs.q_coinc, obs.n_spdc, na).second;
            }
            const double omega_meas = omega0 + b_fin;
            const double y1_c = ch.y1_alice * de_fr.y1_low;
            const double omega1 = single_photon_freq_bound(q_coinc_up, omega_meas, y1_c, nu);
            budget1 = std::max(0.0, omega1 - omega0);
        } else {
            rep.error = "decoy estimation failed on the franson path";
            budget1 = 0.0;
        }
        rep.budget_single_photon = budget1;

        const HolevoSupResult sup_1 = holevo_sup(ctx.baseline, budget1, ctx.ta);
        if (!sup_1.feasible) throw std::runtime_error("holevo_sup: " + sup_1.status);
        rep.chi1_up = sup_1.chi_bits;

        const PieResult p = pie(in.pa.beta, obs.i_ab, rep.chi_e);
        rep.pie_raw = p.raw;
        rep.pie = p.clamped;

        const RateResult rr = secret_key_rate(rep.frame_rate_eff_hz, rep.q1_low, rep.n_r_bits,
                                              rep.chi1_up, rep.q_mu, in.pa.beta, rep.i_ab);
        rep.key_rate_raw_bps = rr.raw_bps;
        rep.key_rate_bps = rr.clamped_bps;

        // Self-check: the reported rate must be recomputable from the report.
        const double recompute =
            rep.frame_rate_eff_hz * (rep.q1_low * (rep.n_r_bits - rep.chi1_up) -
                                     rep.q_mu * (rep.n_r_bits - rep.beta * rep.i_ab));
        const double scale = std::max({std::abs(recompute), std::abs(rep.key_rate_raw_bps), 1e-30});
        rep.self_check_ok = std::abs(recompute - rep.key_rate_raw_bps) <= 1e-9 * scale;
    } catch (const std::exception& e) {
        rep.error = e.what();
        rep.key_rate_bps = 0.0;
    }
    return rep;
}

namespace {

template <typename T, typename Fn>
std::vector<KeyRateReport> parallel_map(const std::vector<T>& axis, int workers, Fn&& fn) {
    std::vector<KeyRateReport> out(axis.size());
    if (axis.empty()) throw std::invalid_argument("sweep: axis must be nonempty");
    if (workers < 1) workers = 1;
    if (workers == 1) {
        for (std::size_t i = 0; i < axis.size(); ++i) out[i] = fn(axis[i]);
        return out;
    }
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    std::atomic<std::size_t> cursor{0};
    for (int w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&] {
            while (true) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= axis.size()) return;
                out[i] = fn(axis[i]);
            }
        }));
    }
    for (auto& f : futures) f.get();
    return out;
}

} // namespace

std::vector<KeyRateReport> sweep_distance(const PointInputs& in, const std::vector<double>& km,
                                          int workers) {
    return parallel_map(km, workers, [&](double l) {
        PointInputs p = in;
        p.channel.length_km = l;
        return evaluate_point(p);
    });
}

std::vector<KeyRateReport> sweep_n(const PointInputs& in, const std::vector<int>& n_values,
                                   int workers) {
    return parallel_map(n_values, workers, [&](int n) {
        PointInputs p = in;
        p.frame.n_bins = n;
        p.decoy.n_bins = n;
        p.decoy.f1_bins = -1;
        p.decoy.f2_bins = -1;
        return evaluate_point(p);
    });
}

std::vector<KeyRateReport> sweep_mu(const PointInputs& in, const std::vector<double>& mu_values,
                                    int workers) {
    return parallel_map(mu_values, workers, [&](double mu) {
        PointInputs p = in;
        p.source.mu_ppm = mu;
        return evaluate_point(p);
    });
}

MuOptimum optimize_mu(const PointInputs& in, double mu_lo, double mu_hi) {
    if (!(mu_lo > 0.0 && mu_hi > mu_lo))
        throw std::invalid_argument("optimize_mu: invalid bounds");

    auto rate_at = [&](double mu) {
        PointInputs p = in;
        p.source.mu_ppm = mu;
        const KeyRateReport r = evaluate_point(p);
        return r.error.empty() ? r.key_rate_bps : 0.0;
    };

    const ScalarMax line = golden_section_max(rate_at, mu_lo, mu_hi, 60);

    // Grid cross-check, which also yields the reported plateau bracket.
    constexpr int kGrid = 41;
    double best_mu = line.x;
    double best_val = line.value;
    std::vector<double> grid_mu(kGrid), grid_val(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        grid_mu[i] = mu_lo + (mu_hi - mu_lo) * i / (kGrid - 1);
        grid_val[i] = rate_at(grid_mu[i]);
        if (grid_val[i] > best_val) {
            best_val = grid_val[i];
            best_mu = grid_mu[i];
        }
    }

    MuOptimum opt;
    opt.mu = best_mu;
    PointInputs p = in;
    p.source.mu_ppm = best_mu;
    opt.report = evaluate_point(p);
    if (best_val <= 0.0) {
        opt.flat_objective = true;
        opt.mu = mu_lo;
        opt.bracket_lo = mu_lo;
        opt.bracket_hi = mu_hi;
        p.source.mu_ppm = mu_lo;
        opt.report = evaluate_point(p);
        return opt;
    }
    opt.bracket_lo = mu_hi;
    opt.bracket_hi = mu_lo;
    for (int i = 0; i < kGrid; ++i) {
        if (grid_val[i] >= 0.9 * best_val) {
            opt.bracket_lo = std::min(opt.bracket_lo, grid_mu[i]);
            opt.bracket_hi = std::max(opt.bracket_hi, grid_mu[i]);
        }
    }
    return opt;
}

} // namespace ppmqkd
