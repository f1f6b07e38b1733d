#include "ppmqkd/keyrate.hpp"

#include "ppmqkd/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace ppmqkd;

namespace {

PointInputs committed_point() {
    PointInputs in;
    in.holevo.bob_time_rms_fraction = 0.12;
    in.holevo.pump_coherence_fraction = 0.10;
    for (DetectorModel* d : {&in.det_key, &in.det_franson, &in.det_alice}) {
        d->dark_prob_per_gate = 2e-6;
        d->afterpulse_prob = 0.004;
    }
    return in;
}

} // namespace

TEST_CASE("analytic mutual information") {
    CHECK(mutual_information_analytic(8, 0.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(mutual_information_analytic(8, 7.0 / 8.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mutual_information_analytic(8, 0.05) == doctest::Approx(2.5732).epsilon(1e-4));
    CHECK_THROWS_AS(mutual_information_analytic(8, 0.95), std::invalid_argument);
}

TEST_CASE("empirical mutual information") {
    const int n = 8;
    std::vector<std::uint64_t> diag(n * n, 0);
    for (int i = 0; i < n; ++i) diag[i * n + i] = 1000;
    CHECK(mutual_information_empirical(diag, n) == doctest::Approx(3.0).epsilon(1e-12));

    std::vector<std::uint64_t> uniform(n * n, 5);
    CHECK(mutual_information_empirical(uniform, n) == doctest::Approx(0.0).epsilon(1e-12));

    // Synthetic symmetric channel sampled at N = 8, e = 0.05.
    rng::Xoshiro256 r(2024);
    std::vector<std::uint64_t> counts(n * n, 0);
    for (int i = 0; i < 1'000'000; ++i) {
        const int x = static_cast<int>(r.uniform() * n);
        int y = x;
        if (r.bernoulli(0.05)) {
            y = static_cast<int>(r.uniform() * (n - 1));
            if (y >= x) ++y;
        }
        counts[static_cast<std::size_t>(x) * n + y] += 1;
    }
    CHECK(std::abs(mutual_information_empirical(counts, n) - 2.5732) <= 0.02);

    CHECK_THROWS_AS(mutual_information_empirical(std::vector<std::uint64_t>(n * n, 0), n),
                    std::invalid_argument);
}

TEST_CASE("first-click error model edge cases") {
    CHECK(symbol_error_first_click(8, 0.0, 0.1) == 0.0);
    CHECK(symbol_error_first_click(8, 1e-6, 0.0) > 0.5);  // noise-only decoding is wrong mostly
    // More noise, more errors.
    CHECK(symbol_error_first_click(8, 1e-3, 0.05) > symbol_error_first_click(8, 1e-4, 0.05));
}

TEST_CASE("photon information efficiency") {
    const PieResult p = pie(0.9, 3.0, 0.37);
    CHECK(p.raw == doctest::Approx(2.33).epsilon(1e-12));
    CHECK(p.clamped == doctest::Approx(2.33).epsilon(1e-12));

    const PieResult q = pie(0.9, 1.0, 2.0);
    CHECK(q.raw == doctest::Approx(-1.1).epsilon(1e-12));
    CHECK(q.clamped == 0.0);

    // Consistency with the N = 128 operating point: beta I = 6.1 gives 4.0.
    CHECK(pie(1.0, 6.1, 2.1).raw == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("secret key rate formula") {
    // Single-photon channel: all terms collapse.
    const RateResult r1 = secret_key_rate(1e8, 0.05, 3.0, 0.4, 0.05, 1.0, 3.0);
    CHECK(r1.raw_bps == doctest::Approx(1e8 * 0.05 * (3.0 - 0.4)).epsilon(1e-12));

    // Pinned arithmetic example.
    const double b_i = 2.67 / 3.0;  // beta * I_AB = 2.67 via beta = 0.89, I = 3
    const RateResult r2 = secret_key_rate(157.5e6, 0.04, 3.0, 0.4, 0.05, b_i, 3.0);
    CHECK(r2.raw_bps == doctest::Approx(1.378125e7).epsilon(1e-9));

    // Worst case: no single-photon credit.
    const RateResult r3 = secret_key_rate(1e8, 0.0, 3.0, 0.4, 0.05, 0.9, 2.9);
    CHECK(r3.raw_bps < 0.0);
    CHECK(r3.clamped_bps == 0.0);

    CHECK_THROWS_AS(secret_key_rate(1e8, 0.06, 3.0, 0.4, 0.05, 0.9, 3.0),
                    std::invalid_argument);
}

TEST_CASE("rate identity holds in rearranged form") {
    rng::Xoshiro256 r(5);
    for (int i = 0; i < 200; ++i) {
        const double q_mu = 0.001 + 0.2 * r.uniform();
        const double q1 = q_mu * r.uniform();
        const double n_r = 1.0 + 9.0 * r.uniform();
        const double chi1 = n_r * r.uniform();
        const double beta = 0.8 + 0.2 * r.uniform();
        const double i_ab = n_r * r.uniform() / beta;
        const double rf = 1e8;
        const RateResult res = secret_key_rate(rf, q1, n_r, chi1, q_mu, beta, i_ab);
        const double rearranged =
            rf * (q_mu * beta * i_ab - q1 * chi1 - (q_mu - q1) * n_r);
        const double scale = std::max({std::abs(res.raw_bps), std::abs(rearranged), 1e-30});
        REQUIRE(std::abs(res.raw_bps - rearranged) <= 1e-12 * scale);
    }
}

TEST_CASE("ideal channel produces a strongly positive point") {
    PointInputs in;
    in.channel.eta_b = 1.0;
    for (DetectorModel* d : {&in.det_key, &in.det_franson, &in.det_alice}) {
        d->efficiency = 0.9;
        d->dark_prob_per_gate = 1e-9;
        d->afterpulse_prob = 0.0;
    }
    const KeyRateReport r = evaluate_point(in);
    REQUIRE(r.error.empty());
    CHECK(r.pie > 0.9 * 3.0 - r.chi_e - 0.1);
    CHECK(r.key_rate_bps > 0.0);
    CHECK(r.self_check_ok);
    CHECK(r.symbol_error_rate < 1e-4);
}

TEST_CASE("reports expose a recomputable rate") {
    const KeyRateReport r = evaluate_point(committed_point());
    REQUIRE(r.error.empty());
    CHECK(r.self_check_ok);
    const double recomputed = r.frame_rate_eff_hz *
                              (r.q1_low * (r.n_r_bits - r.chi1_up) -
                               r.q_mu * (r.n_r_bits - r.beta * r.i_ab));
    CHECK(recomputed == doctest::Approx(r.key_rate_raw_bps).epsilon(1e-9));
}

TEST_CASE("pie never exceeds its ceiling across a sweep") {
    PointInputs in = committed_point();
    const auto reports = sweep_n(in, {2, 4, 8, 16, 32, 64, 128});
    for (const auto& r : reports) {
        REQUIRE(r.error.empty());
        CHECK(r.pie <= r.beta * std::log2(static_cast<double>(r.n_bins)) + 1e-9);
    }
}

TEST_CASE("rate decreases monotonically with distance") {
    PointInputs in = committed_point();
    in.decoy.n_alpha = 0.0;  // asymptotic theory curve
    std::vector<double> km;
    for (int i = 0; i <= 20; ++i) km.push_back(5.0 * i);
    const auto reports = sweep_distance(in, km, 2);
    double prev = 1e18;
    for (const auto& r : reports) {
        REQUIRE(r.error.empty());
        CHECK(r.key_rate_bps <= prev * (1.0 + 1e-9));
        prev = r.key_rate_bps;
    }
    CHECK(reports.front().key_rate_bps > 0.0);
    CHECK(reports.back().key_rate_bps > 0.0);
}

TEST_CASE("loss-regime scaling follows the fiber law") {
    PointInputs in = committed_point();
    in.decoy.n_alpha = 0.0;
    for (DetectorModel* d : {&in.det_key, &in.det_franson, &in.det_alice}) {
        d->dark_prob_per_gate = 1e-10;  // background far below the signal everywhere
        d->afterpulse_prob = 0.0;
    }
    const auto reports = sweep_distance(in, {0.0, 10.0, 25.0, 50.0});
    const double r0 = reports[0].key_rate_bps;
    REQUIRE(r0 > 0.0);
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const double expected = std::pow(10.0, -0.02 * reports[i].distance_km);
        const double got = reports[i].key_rate_bps / r0;
        CHECK(std::abs(got / expected - 1.0) <= 0.10);
    }
}

TEST_CASE("sweep runs through per-point failures") {
    PointInputs in = committed_point();
    in.source.nu_bin = 0.004;
    // With 0.004 pairs per bin the largest frame violates the decoy
    // intensity ordering relative to mu once windows saturate; pick mu low
    // enough that N = 128 fails while N = 8 passes.
    in.source.mu_ppm = 0.06;
    const auto reports = sweep_n(in, {8, 128});
    CHECK(reports[0].error.empty());
    CHECK_FALSE(reports[1].error.empty());
    CHECK(reports[1].key_rate_bps == 0.0);
}

TEST_CASE("decoy failure produces a zero-rate report with diagnostics") {
    PointInputs in = committed_point();
    in.mode = EvalMode::montecarlo;
    in.mc_frames = 2000;  // far too little data for the decoy envelopes
    const KeyRateReport r = evaluate_point(in);
    CHECK(r.key_rate_bps == 0.0);
    CHECK_FALSE(r.error.empty());
}

TEST_CASE("monte carlo mode agrees with the analytic mode") {
    PointInputs in = committed_point();
    in.mode = EvalMode::both;
    in.mc_frames = 4'000'000;
    in.workers = 2;
    const KeyRateReport r = evaluate_point(in);
    REQUIRE(r.error.empty());
    CHECK(r.cross_check.find("(ok)") != std::string::npos);

    PointInputs an = committed_point();
    const KeyRateReport ra = evaluate_point(an);
    CHECK(std::abs(r.q_mu - ra.q_mu) <= 6.0 * std::sqrt(ra.q_mu / (0.7 * 4e6)));
    CHECK(std::abs(r.i_ab - ra.i_ab) <= 0.05);
}

TEST_CASE("optimal intensity bracket covers the reference choice") {
    PointInputs in = committed_point();
    const MuOptimum opt = optimize_mu(in, 0.1, 1.2);
    REQUIRE_FALSE(opt.flat_objective);
    CHECK(opt.report.key_rate_bps > 0.0);
    CHECK(opt.bracket_lo <= 0.5);
    CHECK(opt.bracket_hi >= 0.5);
    // The optimum is a local maximum against its grid neighbours.
    PointInputs lo = in, hi = in;
    lo.source.mu_ppm = opt.mu * 0.9;
    hi.source.mu_ppm = opt.mu * 1.1;
    CHECK(evaluate_point(lo).key_rate_bps <= opt.report.key_rate_bps * (1.0 + 1e-6));
    CHECK(evaluate_point(hi).key_rate_bps <= opt.report.key_rate_bps * (1.0 + 1e-6));
}

TEST_CASE("zero-budget security still terminates the optimizer") {
    PointInputs in = committed_point();
    in.holevo.visibility_ratio = 1.0;
    const MuOptimum opt = optimize_mu(in, 0.2, 0.8);
    CHECK(opt.report.error.empty());
    CHECK(opt.report.key_rate_bps > 0.0);
}
