#include "ppmqkd/config.hpp"
#include "ppmqkd/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

using namespace ppmqkd;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPointFailure = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_prefix;
    std::string scenario;
    std::string mode;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

RunConfig load_with_overrides(const CommonOpts& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
    if (o.seed_set) cfg.point.seed = o.seed;
    if (!o.mode.empty()) {
        if (o.mode == "analytic") cfg.point.mode = EvalMode::analytic;
        else if (o.mode == "montecarlo") cfg.point.mode = EvalMode::montecarlo;
        else if (o.mode == "both") cfg.point.mode = EvalMode::both;
        else throw ConfigError({"--mode must be analytic | montecarlo | both"});
    }
    if (!o.out_prefix.empty()) cfg.out_prefix = o.out_prefix;
    if (!o.scenario.empty()) cfg.scenario = o.scenario;
    if (o.workers > 0) cfg.point.workers = o.workers;
    return cfg;
}

int emit(const RunConfig& cfg, const std::vector<KeyRateReport>& reports) {
    const std::string csv_path = cfg.out_prefix + ".csv";
    const std::string json_path = cfg.out_prefix + ".json";
    write_reports_csv(csv_path, reports);
    write_summary_json(json_path, reports, cfg.config_hash());
    std::cout << "wrote " << csv_path << " and " << json_path << "\n";
    for (const auto& r : reports)
        if (!r.error.empty()) {
            std::cerr << "point N=" << r.n_bins << " d=" << r.distance_km
                      << " km failed: " << r.error << "\n";
        }
    for (const auto& r : reports)
        if (!r.error.empty()) return kExitPointFailure;
    return kExitOk;
}

std::vector<double> default_distances() {
    std::vector<double> km;
    for (int i = 0; i <= 20; ++i) km.push_back(5.0 * i);
    return km;
}

int cmd_keyrate(const CommonOpts& o) {
    const RunConfig cfg = load_with_overrides(o);
    return emit(cfg, {evaluate_point(cfg.point)});
}

int cmd_sweep(const CommonOpts& o, bool optimize) {
    RunConfig cfg = load_with_overrides(o);
    std::vector<KeyRateReport> reports;
    const int workers = std::max(1, cfg.point.workers);
    if (cfg.scenario == "fig2") {
        PointInputs base = cfg.point;
        for (int n : {2, 4, 8, 16, 32, 64, 128}) {
            PointInputs p = base;
            p.frame.n_bins = n;
            p.decoy.f1_bins = -1;
            p.decoy.f2_bins = -1;
            if (optimize) {
                reports.push_back(optimize_mu(p, 0.1, 1.2).report);
            } else {
                reports.push_back(evaluate_point(p));
            }
        }
    } else if (cfg.scenario == "fig3") {
        const std::vector<double> km = default_distances();
        for (int n : {2, 8, 32}) {
            PointInputs p = cfg.point;
            p.frame.n_bins = n;
            p.decoy.f1_bins = -1;
            p.decoy.f2_bins = -1;
            auto rows = sweep_distance(p, km, workers);
            reports.insert(reports.end(), rows.begin(), rows.end());
        }
    } else {
        const std::vector<double> km =
            cfg.distances_km.empty() ? default_distances() : cfg.distances_km;
        reports = sweep_distance(cfg.point, km, workers);
    }
    return emit(cfg, reports);
}

int cmd_simulate(const CommonOpts& o, std::uint64_t frames, const std::string& ledger_path) {
    RunConfig cfg = load_with_overrides(o);
    cfg.point.mode = EvalMode::montecarlo;
    if (frames > 0) cfg.point.mc_frames = frames;

    SimParams sp;
    sp.frame = cfg.point.frame;
    sp.source = cfg.point.source;
    sp.channel_eta = cfg.point.channel.eta_b *
                     std::pow(10.0, -cfg.point.channel.alpha_db_per_km *
                                        cfg.point.channel.length_km / 10.0);
    sp.split = cfg.point.split;
    sp.det_key = cfg.point.det_key;
    sp.det_franson = cfg.point.det_franson;
    sp.det_alice = cfg.point.det_alice;
    sp.alice_path_eta = cfg.point.alice_path_eta;
    sp.decoy_f1_bins = cfg.point.decoy.f1_bins;
    sp.decoy_f2_bins = cfg.point.decoy.f2_bins;

    std::vector<FrameRecord> records;
    std::vector<FrameRecord>* rec_ptr = ledger_path.empty() ? nullptr : &records;
    const EmpiricalStats st = run_simulation(sp, cfg.point.mc_frames, cfg.point.seed,
                                             cfg.point.workers, rec_ptr);
    if (!ledger_path.empty()) write_ledger_csv(ledger_path, records);

    std::cout << "frames=" << st.frames_total << " Q_mu_hat=" << st.q_mu_hat()
              << " Q_nu1_hat=" << st.q_nu1_hat() << " Q_nu2_hat=" << st.q_nu2_hat()
              << " symbol_error=" << st.symbol_error_rate() << " car_hat=" << st.car_hat()
              << "\n";
    const KeyRateReport rep = evaluate_point(cfg.point);
    return emit(cfg, {rep});
}

int cmd_decoy_bounds(const CommonOpts& o, double q_mu, double q_nu1, double q_nu2,
                     std::uint64_t n_frames, double omega_sq) {
    const RunConfig cfg = load_with_overrides(o);
    DecoyConfig dc = cfg.point.decoy;
    dc.n_bins = cfg.point.frame.n_bins;
    if (dc.f1_bins <= 0) dc.f1_bins = DecoyConfig::default_f1(dc.n_bins);
    if (dc.f2_bins <= 0) dc.f2_bins = DecoyConfig::default_f2(dc.n_bins);
    dc.nu_bin = cfg.point.source.nu_bin;

    DecoyObservables obs;
    obs.q_mu = q_mu;
    obs.q_nu1 = q_nu1;
    obs.q_nu2 = q_nu2;
    obs.n_mu = obs.n_nu1 = obs.n_nu2 = obs.n_nu_full = n_frames;
    obs.omega_diff_sq = omega_sq;
    const DecoyEstimate est = decoy_estimate(obs, dc, cfg.point.source.mu_ppm);
    std::cout << "{\n  \"y0_low\": " << est.y0_low << ",\n  \"y1_low\": " << est.y1_low
              << ",\n  \"q1_low\": " << est.q1_low << ",\n  \"freq_bound\": " << est.freq_bound
              << ",\n  \"nu1\": " << est.nu1 << ",\n  \"nu2\": " << est.nu2
              << ",\n  \"n_alpha\": " << est.n_alpha_used
              << ",\n  \"failed\": " << (est.estimation_failed ? "true" : "false") << "\n}\n";
    return est.estimation_failed ? kExitPointFailure : kExitOk;
}

int cmd_holevo(const CommonOpts& o) {
    const RunConfig cfg = load_with_overrides(o);
    const KeyRateReport rep = evaluate_point(cfg.point);
    if (!rep.error.empty()) {
        std::cerr << "error: " << rep.error << "\n";
        return kExitPointFailure;
    }
    std::cout << "{\n  \"v_theory\": " << rep.v_theory
              << ",\n  \"v_measured\": " << rep.v_measured << ",\n  \"budget\": " << rep.budget
              << ",\n  \"chi_E\": " << rep.chi_e << ",\n  \"chi1_up\": " << rep.chi1_up
              << ",\n  \"sigma_coh_eff_s\": " << rep.sigma_coh_eff_s
              << ",\n  \"coherence_truncated\": " << (rep.coherence_truncated ? "true" : "false")
              << "\n}\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PPM-QKD simulator and key-rate calculator"};
    app.require_subcommand(1);

    CommonOpts o;
    app.add_option("--config", o.config_path, "JSON configuration file");
    app.add_option("--out", o.out_prefix, "output path prefix");
    app.add_option("--scenario", o.scenario, "custom | fig2 | fig3");
    app.add_option("--mode", o.mode, "analytic | montecarlo | both");
    auto* seed_opt = app.add_option("--seed", o.seed, "override RNG seed");
    app.add_option("--workers", o.workers, "worker threads");

    auto* keyrate_cmd = app.add_subcommand("keyrate", "evaluate a single parameter point");
    bool optimize = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep a scenario to CSV");
    sweep_cmd->add_flag("--optimize-mu", optimize, "optimize the PPM intensity per point");
    std::uint64_t frames = 0;
    std::string ledger_path;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run with optional ledger dump");
    sim_cmd->add_option("--frames", frames, "number of frames");
    sim_cmd->add_option("--ledger", ledger_path, "frame-ledger CSV path");
    double q_mu = 0.0, q_nu1 = 0.0, q_nu2 = 0.0, omega_sq = 0.0;
    std::uint64_t n_frames = 1000000;
    auto* decoy_cmd = app.add_subcommand("decoy-bounds", "bounds from supplied gains");
    decoy_cmd->add_option("--q-mu", q_mu, "signal gain")->required();
    decoy_cmd->add_option("--q-nu1", q_nu1, "first decoy gain")->required();
    decoy_cmd->add_option("--q-nu2", q_nu2, "second decoy gain")->required();
    decoy_cmd->add_option("--frames", n_frames, "frames behind each gain");
    decoy_cmd->add_option("--omega-sq", omega_sq, "measured frequency statistic");
    auto* holevo_cmd = app.add_subcommand("holevo", "security quantities for the config point");

    try {
        app.parse(argc, argv);
        o.seed_set = seed_opt->count() > 0;
        if (keyrate_cmd->parsed()) return cmd_keyrate(o);
        if (sweep_cmd->parsed()) return cmd_sweep(o, optimize);
        if (sim_cmd->parsed()) return cmd_simulate(o, frames, ledger_path);
        if (decoy_cmd->parsed()) return cmd_decoy_bounds(o, q_mu, q_nu1, q_nu2, n_frames, omega_sq);
        if (holevo_cmd->parsed()) return cmd_holevo(o);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    } catch (const ppmqkd::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPointFailure;
    }
    return kExitOk;
}
