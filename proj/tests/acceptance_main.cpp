// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Needs --configs <dir> (committed run configurations) and
// --cli <path> (the command-line binary, exercised for determinism).

#include "ppmqkd/config.hpp"
#include "ppmqkd/numerics.hpp"
#include "ppmqkd/report.hpp"
#include "ppmqkd/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace ppmqkd;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_configs = "configs";
std::string g_cli;

struct Criterion {
    int id;
    std::string name;
    bool passed = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

PointInputs load_point(const std::string& name) {
    return RunConfig::load(g_configs + "/" + name).point;
}

// ---------------------------------------------------------------- criterion 1
bool gain_model_equivalence(std::string& detail) {
    const auto t0 = Clock::now();
    PointInputs in = load_point("paper_defaults.json");
    in.det_key.afterpulse_prob = 0.0;
    in.det_franson.afterpulse_prob = 0.0;
    in.det_alice.afterpulse_prob = 0.0;
    const AnalyticChannel ch = compute_analytic_channel(in);

    SimParams sp;
    sp.frame = in.frame;
    sp.source = in.source;
    sp.channel_eta = in.channel.eta_b;
    sp.split = in.split;
    sp.det_key = in.det_key;
    sp.det_franson = in.det_franson;
    sp.det_alice = in.det_alice;
    const std::uint64_t frames = 1'000'000;
    const EmpiricalStats st = run_simulation(sp, frames, 20260810, 2);

    const double n_ase = static_cast<double>(st.ase_frames);
    const double sigma = std::sqrt(ch.q_mu_key * (1.0 - ch.q_mu_key) / n_ase);
    const double dev = std::abs(st.q_mu_hat() - ch.q_mu_key);
    const double elapsed = seconds_since(t0);

    std::ostringstream os;
    os << "Q_mu_hat=" << st.q_mu_hat() << " analytic=" << ch.q_mu_key << " |dev|=" << dev
       << " 5sigma=" << 5.0 * sigma << " runtime=" << elapsed << "s";
    detail = os.str();
    return dev <= 5.0 * sigma && elapsed < 30.0;
}

// ---------------------------------------------------------------- criterion 2
double honest_gain(double y0, double eta, double intensity) {
    double q = 0.0;
    for (int i = 0; i <= 60; ++i)
        q += yield_i(y0, i_photon_efficiency(eta, i)) * poisson_pmf(intensity, i);
    return q;
}

bool decoy_soundness(std::string& detail) {
    // Exact honest channels: the bounds may never cross the true values.
    rng::Xoshiro256 r(424242);
    int exact_ok = 0;
    for (int k = 0; k < 500; ++k) {
        double eta, y0, mu, nu1, nu2;
        do {
            eta = 1e-3 * std::pow(200.0, r.uniform());
            y0 = 1e-4 * r.uniform();
            mu = 0.1 + 0.9 * r.uniform();
            nu1 = mu * (0.02 + 0.38 * r.uniform());
            nu2 = nu1 * (0.1 + 0.8 * r.uniform());
        } while (!(nu1 + nu2 < mu));
        const double q_mu = honest_gain(y0, eta, mu);
        const double q1 = honest_gain(y0, eta, nu1);
        const double q2 = honest_gain(y0, eta, nu2);
        const double y0l = y0_lower(q1, q2, nu1, nu2);
        const double y1l = y1_lower(q_mu, q1, q2, mu, nu1, nu2, y0l);
        const double y1_true = yield_i(y0, eta);
        if (y1l <= y1_true * (1.0 + 1e-9) &&
            q1_lower(mu, y1l) <= y1_true * mu * std::exp(-mu) * (1.0 + 1e-9))
            ++exact_ok;
    }

    // Seeded simulator runs with tagged photon numbers as the oracle.
    PointInputs in = load_point("paper_defaults.json");
    SimParams sp;
    sp.frame = in.frame;
    sp.source = in.source;
    sp.channel_eta = in.channel.eta_b;
    sp.split = in.split;
    sp.det_key = in.det_key;
    sp.det_franson = in.det_franson;
    sp.det_alice = in.det_alice;

    DecoyConfig dc = in.decoy;
    dc.n_bins = in.frame.n_bins;
    dc.f1_bins = DecoyConfig::default_f1(dc.n_bins);
    dc.f2_bins = DecoyConfig::default_f2(dc.n_bins);
    const AnalyticChannel ch = compute_analytic_channel(in);
    dc.nu_bin = ch.g_mode * in.source.nu_bin;
    dc.dark_prob_per_gate = ch.noise_per_gate_key;

    int mc_ok = 0;
    double mean_bound = 0.0;
    for (int run = 1; run <= 100; ++run) {
        const EmpiricalStats st = run_simulation(sp, 10'000'000, 9000 + run, 2);
        DecoyObservables obs;
        obs.q_mu = st.q_mu_hat();
        obs.q_nu1 = st.q_nu1_hat();
        obs.q_nu2 = st.q_nu2_hat();
        obs.q_nu_full = st.q_nu_hat();
        obs.n_mu = st.ase_frames;
        obs.n_nu1 = obs.n_nu2 = obs.n_nu_full = st.spdc_frames;
        obs.omega_diff_sq = 1.0;
        const DecoyEstimate est = decoy_estimate(obs, dc, in.source.mu_ppm);
        const double q1_emp = st.empirical_q1_hat();
        if (est.q1_low <= q1_emp) ++mc_ok;
        mean_bound += est.q1_low;
    }
    mean_bound /= 100.0;

    std::ostringstream os;
    os << "exact honest configs sound: " << exact_ok << "/500, simulator runs sound: " << mc_ok
       << "/100, mean Q1_low=" << mean_bound;
    detail = os.str();
    return exact_ok == 500 && mc_ok == 100;
}

// ---------------------------------------------------------------- criterion 3
bool holevo_identities(std::string& detail) {
    rng::Xoshiro256 r(31337);
    double worst_purity = 0.0;
    for (int i = 0; i < 200; ++i) {
        BiphotonParams p;
        p.sigma_coh_s = 1e-9 * std::pow(1e6, r.uniform());
        p.sigma_cor_s = 1e-13 * std::pow(1e2, r.uniform());
        worst_purity = std::max(worst_purity, joint_entropy(baseline_tfcm(p)));
    }
    const bool purity_ok = worst_purity <= 1e-9;
    const bool f_half_ok = entropy_f(0.5) == 0.0;

    BiphotonParams p;
    p.sigma_cor_s = 9.4e-13;
    TimeAssumptions ta;
    const double t_f = 8 * 794e-12;
    ta.bob_time_variance_s2 = t_f * t_f / 12.0;
    ta.jitter_rms_s = 30e-12;
    p.sigma_coh_s = max_physical_sigma_coh(p, ta);
    const Tfcm base = baseline_tfcm(p);

    bool monotone = true;
    double prev = -1.0;
    for (int i = 0; i < 20; ++i) {
        const double chi = holevo_sup(base, 1e15 * i, ta, 60).chi_bits;
        monotone = monotone && chi >= prev - 1e-9;
        prev = chi;
    }

    const HolevoSupResult zero = holevo_sup(base, 0.0, ta);
    const double direct = holevo_chi(apply_time_assumptions(base, ta));
    const bool singleton = zero.feasible && std::abs(zero.chi_bits - direct) <= 1e-12;

    std::ostringstream os;
    os << "worst purity=" << worst_purity << " bits, f(1/2)=" << entropy_f(0.5)
       << ", sup monotone over 20 budgets=" << (monotone ? "yes" : "no")
       << ", budget-0 singleton matches direct chi=" << (singleton ? "yes" : "no");
    detail = os.str();
    return purity_ok && f_half_ok && monotone && singleton;
}

// ---------------------------------------------------------------- criterion 4
bool paper_number_consistency(std::string& detail) {
    const PointInputs in = load_point("paper_point.json");
    const auto reports = sweep_n(in, {4, 8, 16, 32, 64, 128}, 2);
    for (const auto& rep : reports)
        if (!rep.error.empty()) {
            detail = "point failed: " + rep.error;
            return false;
        }
    const double chi8 = reports[1].chi_e;
    const double chi128 = reports[5].chi_e;
    bool pie_monotone = true;
    for (std::size_t i = 1; i < reports.size(); ++i)
        pie_monotone = pie_monotone && reports[i].pie >= reports[i - 1].pie - 1e-9;

    std::ostringstream os;
    os << "chi_E(8)=" << chi8 << " in [0.2,0.6], chi_E(128)=" << chi128
       << " in [1.4,2.8], PIE over N:";
    for (const auto& rep : reports) os << " " << rep.pie;
    detail = os.str();
    return chi8 >= 0.2 && chi8 <= 0.6 && chi128 >= 1.4 && chi128 <= 2.8 && pie_monotone;
}

// ---------------------------------------------------------------- criterion 5
bool distance_scaling(std::string& detail) {
    PointInputs in = load_point("paper_point.json");
    in.decoy.n_alpha = 0.0;  // asymptotic theory curve
    const auto reports = sweep_distance(in, {0.0, 25.0, 100.0}, 2);
    for (const auto& rep : reports)
        if (!rep.error.empty()) {
            detail = "point failed: " + rep.error;
            return false;
        }
    const double ratio = reports[1].key_rate_bps / reports[0].key_rate_bps;
    const double target = std::pow(10.0, -0.5);
    const double rel = std::abs(ratio / target - 1.0);
    const double r100 = reports[2].key_rate_bps;

    std::ostringstream os;
    os << "R(25)/R(0)=" << ratio << " vs 10^-0.5=" << target << " (rel dev " << rel * 100.0
       << "%), R(100 km)=" << r100 << " bps";
    detail = os.str();
    return rel <= 0.10 && r100 > 0.0;
}

// ---------------------------------------------------------------- criterion 6
bool extension_check(std::string& detail) {
    PointInputs ext = load_point("extension_n1024.json");
    const KeyRateReport with_frame_delay = evaluate_point(ext);
    ext.holevo.delta_t_equals_frame = false;
    const KeyRateReport with_bin_delay = evaluate_point(ext);
    if (!with_frame_delay.error.empty() || !with_bin_delay.error.empty()) {
        detail = "point failed: " + with_frame_delay.error + " / " + with_bin_delay.error;
        return false;
    }
    std::ostringstream os;
    os << "PIE(dT=T_f)=" << with_frame_delay.pie << " in [7.0,10.5], PIE(dT=tau)="
       << with_bin_delay.pie;
    detail = os.str();
    return with_frame_delay.pie > with_bin_delay.pie && with_frame_delay.pie >= 7.0 &&
           with_frame_delay.pie <= 10.5;
}

// ---------------------------------------------------------------- criterion 7
bool finite_key_behaviors(std::string& detail) {
    const double x = 2.5e15;
    const double f2 = finite_key_frequency_bound(x, 100, 1e-5) / x - 1.0;
    const double f4 = finite_key_frequency_bound(x, 10'000, 1e-5) / x - 1.0;
    const double f6 = finite_key_frequency_bound(x, 1'000'000, 1e-5) / x - 1.0;
    const bool inflation_vanishes = f2 > f4 && f4 > f6 && f6 < 1e-2 && f6 > 0.0;

    bool envelopes_collapse = true;
    double prev_width = 1e9;
    for (std::uint64_t n : {std::uint64_t(1e6), std::uint64_t(1e9), std::uint64_t(1e12)}) {
        const auto [lo, up] = gain_fluctuation_bounds(0.05, n, 4.89);
        envelopes_collapse = envelopes_collapse && (up - lo) < prev_width;
        prev_width = up - lo;
    }
    envelopes_collapse = envelopes_collapse && prev_width < 1e-6;

    DecoyConfig dc;
    dc.n_bins = 8;
    dc.f1_bins = 4;
    dc.f2_bins = 2;
    dc.nu_bin = 0.005;
    DecoyObservables obs;
    obs.q_mu = honest_gain(1e-5, 0.05, 0.5);
    obs.q_nu1 = honest_gain(1e-5, 0.05, 0.02);
    obs.q_nu2 = honest_gain(1e-5, 0.05, 0.01);
    obs.q_nu_full = honest_gain(1e-5, 0.05, 0.04);
    obs.n_mu = obs.n_nu1 = obs.n_nu2 = obs.n_nu_full = 1'000'000'000ULL;
    obs.omega_diff_sq = 1e15;
    bool q1_monotone = true;
    double prev_q1 = 2.0;
    for (double na : {0.0, 1.0, 3.0, 5.0, 8.0}) {
        dc.n_alpha = na;
        const DecoyEstimate est = decoy_estimate(obs, dc, 0.5);
        q1_monotone = q1_monotone && est.q1_low <= prev_q1 + 1e-15;
        prev_q1 = est.q1_low;
    }

    std::ostringstream os;
    os << "inflation excess at m=1e2,1e4,1e6: " << f2 << ", " << f4 << ", " << f6
       << "; envelope width collapses to " << prev_width << "; Q1_low nonincreasing in n_alpha="
       << (q1_monotone ? "yes" : "no");
    detail = os.str();
    return inflation_vanishes && envelopes_collapse && q1_monotone;
}

// ---------------------------------------------------------------- criterion 8
BitVec bits_from(rng::Xoshiro256& r, std::size_t n) {
    BitVec v(n);
    for (std::size_t i = 0; i < n; ++i) v.set(i, r.bernoulli(0.5));
    return v;
}

bool postprocessing_checks(std::string& detail) {
    rng::Xoshiro256 r(808);
    bool linear = true;
    for (int t = 0; t < 1000; ++t) {
        const BitVec seed = bits_from(r, 128 + 32 - 1);
        const BitVec a = bits_from(r, 128);
        const BitVec b = bits_from(r, 128);
        linear = linear && (toeplitz_hash(a ^ b, seed, 32) ==
                            (toeplitz_hash(a, seed, 32) ^ toeplitz_hash(b, seed, 32)));
    }

    BitVec x(4), seed(5);
    const bool xb[4] = {true, true, false, true};
    const bool sb[5] = {true, false, true, true, false};
    for (int i = 0; i < 4; ++i) x.set(i, xb[i]);
    for (int i = 0; i < 5; ++i) seed.set(i, sb[i]);
    const BitVec y = toeplitz_hash(x, seed, 2);
    const bool hand_ok = y.get(0) == true && y.get(1) == true;

    bool accounting = true;
    for (int t = 0; t < 100; ++t) {
        const std::uint64_t symbols = 500 + static_cast<std::uint64_t>(r.uniform() * 8000);
        const int k = 1 + static_cast<int>(r.uniform() * 7);
        const double beta = 0.85 + 0.15 * r.uniform();
        const double i_ab = r.uniform() * k;
        const double pie_bits = beta * i_ab * r.uniform();
        const KeyAccounting acc =
            key_accounting(symbols, k, beta, i_ab, pie_bits, r.uniform() * 40.0);
        accounting = accounting &&
                     acc.final_bits + acc.leakage_bits + acc.pa_discard_bits == acc.raw_bits;
    }

    std::ostringstream os;
    os << "linearity 1000/1000=" << (linear ? "yes" : "no")
       << ", hand 4->2 example=" << (hand_ok ? "11" : "mismatch")
       << ", accounting identity 100/100=" << (accounting ? "yes" : "no");
    detail = os.str();
    return linear && hand_ok && accounting;
}

// ---------------------------------------------------------------- criterion 9
bool determinism(std::string& detail) {
    if (g_cli.empty()) {
        detail = "no --cli path provided";
        return false;
    }
    const std::string cfg = g_configs + "/paper_defaults.json";
    auto run = [&](const std::string& out, int workers, int seed) {
        std::ostringstream cmd;
        cmd << g_cli << " --config " << cfg << " --mode montecarlo --seed " << seed
            << " --workers " << workers << " --out " << out
            << " sweep > /dev/null 2>&1";
        return std::system(cmd.str().c_str());
    };
    const char* base = "/tmp/ppmqkd_det";
    if (run(std::string(base) + "_a", 1, 7) != 0 || run(std::string(base) + "_b", 1, 7) != 0 ||
        run(std::string(base) + "_c", 1, 7) != 0 || run(std::string(base) + "_d", 8, 7) != 0) {
        detail = "CLI sweep invocation failed";
        return false;
    }
    const std::string a = read_file(std::string(base) + "_a.csv");
    const std::string b = read_file(std::string(base) + "_b.csv");
    const std::string c = read_file(std::string(base) + "_c.csv");
    const std::string d = read_file(std::string(base) + "_d.csv");
    const bool identical = !a.empty() && a == b && b == c && a == d;

    std::ostringstream os;
    os << "CSV bytes: run1==run2==run3=" << ((a == b && b == c) ? "yes" : "no")
       << ", 1 worker == 8 workers=" << ((a == d) ? "yes" : "no") << " (" << a.size()
       << " bytes)";
    detail = os.str();
    return identical;
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--configs") g_configs = argv[i + 1];
        if (arg == "--cli") g_cli = argv[i + 1];
    }

    const auto suite_start = Clock::now();
    std::vector<Criterion> criteria = {
        {1, "gain-model equivalence (simulated vs analytic within 5 sigma, < 30 s)"},
        {2, "decoy soundness (500 exact configs, 100 tagged simulator runs)"},
        {3, "holevo engine identities (purity, f(1/2), budget monotonicity, singleton)"},
        {4, "reference-point consistency (chi_E brackets at N=8/128, PIE monotone)"},
        {5, "distance scaling (R(25)/R(0) near 10^-0.5, R(100 km) > 0)"},
        {6, "frame-delay extension (N=1024 PIE bracket, exceeds bin-delay PIE)"},
        {7, "finite-key behaviors (inflation and envelopes vanish, Q1_low monotone)"},
        {8, "post-processing (toeplitz linearity, hand example, accounting identity)"},
        {9, "determinism (byte-identical sweep CSV across runs and worker counts)"},
    };
    const std::vector<std::function<bool(std::string&)>> fns = {
        gain_model_equivalence, decoy_soundness, holevo_identities, paper_number_consistency,
        distance_scaling, extension_check, finite_key_behaviors, postprocessing_checks,
        determinism,
    };

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i].passed = fns[i](criteria[i].detail);
        } catch (const std::exception& e) {
            criteria[i].passed = false;
            criteria[i].detail = std::string("exception: ") + e.what();
        }
        all = all && criteria[i].passed;
        std::cout << (criteria[i].passed ? "[PASS] " : "[FAIL] ") << "criterion " << criteria[i].id
                  << ": " << criteria[i].name << "\n        " << criteria[i].detail << "\n";
    }

    const double total = seconds_since(suite_start);
    std::cout << (total < 600.0 ? "[PASS] " : "[FAIL] ") << "suite runtime " << total
              << " s (limit 600 s)\n";
    all = all && total < 600.0;
    std::cout << (all ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << "\n";
    return all ? 0 : 1;
}
