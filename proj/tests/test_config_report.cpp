#include "ppmqkd/config.hpp"
#include "ppmqkd/report.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace ppmqkd;

TEST_CASE("empty and malformed configs fail with parse errors") {
    CHECK_THROWS_AS(RunConfig::from_json_text(""), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text("{"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_json_text("[1,2]"), ConfigError);
}

TEST_CASE("defaults load and validate") {
    const RunConfig cfg = RunConfig::from_json_text("{}");
    CHECK(cfg.point.frame.n_bins == 8);
    CHECK(cfg.point.frame.tau_s == doctest::Approx(794e-12));
    CHECK(cfg.point.source.mu_ppm == doctest::Approx(0.5));
    CHECK(cfg.point.source.nu_bin == doctest::Approx(0.005));
    CHECK(cfg.point.source.p_os == doctest::Approx(0.7));
    CHECK(cfg.point.det_key.efficiency == doctest::Approx(0.18));
    CHECK(cfg.point.pa.eps_ec == doctest::Approx(1e-10));
    CHECK(cfg.point.holevo.eps_pe == doctest::Approx(1e-5));
    CHECK(cfg.point.holevo.m_samples == 100);
    CHECK(cfg.point.decoy.eps_decoy == doctest::Approx(1e-6));
}

TEST_CASE("violations are collected with field-precise messages") {
    const std::string text = R"({
        "frame": {"bins": 12},
        "source": {"p_os": 1.5},
        "postprocess": {"beta": 0.0}
    })";
    try {
        RunConfig::from_json_text(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.messages().size() >= 3);
        bool frame = false, source = false, post = false;
        for (const auto& m : e.messages()) {
            frame = frame || m.find("frame") != std::string::npos;
            source = source || m.find("source") != std::string::npos;
            post = post || m.find("postprocess") != std::string::npos;
        }
        CHECK(frame);
        CHECK(source);
        CHECK(post);
    }
}

TEST_CASE("decoy intensity ordering is validated by name") {
    // nu1 + nu2 >= mu in effective in-mode units.
    const std::string text = R"({
        "source": {"mu_ppm": 0.001}
    })";
    try {
        RunConfig::from_json_text(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        bool found = false;
        for (const auto& m : e.messages())
            found = found || m.find("decoy") != std::string::npos;
        CHECK(found);
    }
}

TEST_CASE("config round trip preserves the hash") {
    RunConfig cfg = RunConfig::from_json_text(R"({
        "frame": {"bins": 16},
        "channel": {"length_km": 12.5},
        "run": {"seed": 99, "mode": "both"}
    })");
    const std::string dumped = cfg.to_json_text();
    const RunConfig again = RunConfig::from_json_text(dumped);
    CHECK(again.point.frame.n_bins == 16);
    CHECK(again.point.channel.length_km == doctest::Approx(12.5));
    CHECK(again.point.seed == 99);
    CHECK(again.point.mode == EvalMode::both);
    CHECK(again.config_hash() == cfg.config_hash());
}

TEST_CASE("csv schema is frozen") {
    CHECK(std::string(kReportCsvHeader) ==
          "N,distance_km,Q_mu,Q1_low,chi_E,chi1_up,I_AB,pie,key_rate_bps,"
          "photon_rate_hz,seed,mode,error");
}

TEST_CASE("report csv round trip") {
    KeyRateReport r;
    r.n_bins = 8;
    r.distance_km = 12.345678912;
    r.q_mu = 0.0446012345;
    r.q1_low = 0.0267890123;
    r.chi_e = 0.372101234;
    r.chi1_up = 0.551234567;
    r.i_ab = 2.96530001;
    r.pie = 2.16470002;
    r.key_rate_bps = 5528711.12;
    r.photon_rate_hz = 4913000.55;
    r.seed = 42;
    r.mode = "analytic";

    const std::string csv = reports_to_csv({r});
    const auto rows = parse_reports_csv(csv);
    REQUIRE(rows.size() == 1);
    const KeyRateReport& p = rows[0];
    CHECK(p.n_bins == 8);
    CHECK(std::abs(p.distance_km - r.distance_km) <= 1e-9 * r.distance_km);
    CHECK(std::abs(p.q_mu - r.q_mu) <= 1e-9 * r.q_mu);
    CHECK(std::abs(p.key_rate_bps - r.key_rate_bps) <= 1e-9 * r.key_rate_bps);
    CHECK(p.seed == 42);
    CHECK(p.mode == "analytic");
    CHECK(p.error.empty());

    CHECK_THROWS_AS(reports_to_csv({}), std::invalid_argument);
}

TEST_CASE("summary json carries the config hash and version") {
    KeyRateReport r;
    r.n_bins = 8;
    r.mode = "analytic";
    const std::string js = reports_summary_json({r}, "deadbeef01234567");
    CHECK(js.find("deadbeef01234567") != std::string::npos);
    CHECK(js.find("version") != std::string::npos);
    CHECK(js.find("point_failures") != std::string::npos);
}

TEST_CASE("error cells never break the csv row structure") {
    KeyRateReport r;
    r.n_bins = 8;
    r.mode = "analytic";
    r.error = "bad, news\nwith a newline";
    const auto rows = parse_reports_csv(reports_to_csv({r}));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].error == "bad; news;with a newline");
}
