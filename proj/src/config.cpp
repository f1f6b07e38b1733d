#include "ppmqkd/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>

namespace ppmqkd {

using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error(join(messages)), messages_(std::move(messages)) {}

std::string ConfigError::join(const std::vector<std::string>& m) {
    std::ostringstream os;
    os << "configuration invalid:";
    for (const auto& s : m) os << "\n  - " << s;
    return os.str();
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_detector(const json& j, DetectorModel& d) {
    read_field(j, "efficiency", d.efficiency);
    if (j.contains("dark_count_rate_hz") && j.contains("gate_rate_hz")) {
        d.dark_prob_per_gate =
            j.at("dark_count_rate_hz").get<double>() / j.at("gate_rate_hz").get<double>();
    }
    read_field(j, "dark_prob_per_gate", d.dark_prob_per_gate);
    read_field(j, "gate_width_s", d.gate_width_s);
    read_field(j, "afterpulse_prob", d.afterpulse_prob);
    read_field(j, "afterpulse_decay_per_gate", d.afterpulse_decay_per_gate);
    read_field(j, "afterpulse_memory_frames", d.afterpulse_memory_frames);
    read_field(j, "jitter_rms_s", d.jitter_rms_s);
    read_field(j, "max_record_rate_hz", d.max_record_rate_hz);
}

json detector_to_json(const DetectorModel& d) {
    return json{{"efficiency", d.efficiency},
                {"dark_prob_per_gate", d.dark_prob_per_gate},
                {"gate_width_s", d.gate_width_s},
                {"afterpulse_prob", d.afterpulse_prob},
                {"afterpulse_decay_per_gate", d.afterpulse_decay_per_gate},
                {"afterpulse_memory_frames", d.afterpulse_memory_frames},
                {"jitter_rms_s", d.jitter_rms_s},
                {"max_record_rate_hz", d.max_record_rate_hz}};
}

} // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("JSON parse error: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"top level must be a JSON object"});

    RunConfig cfg;
    PointInputs& p = cfg.point;

    if (j.contains("frame")) {
        const json& f = j.at("frame");
        read_field(f, "bins", p.frame.n_bins);
        read_field(f, "bin_duration_s", p.frame.tau_s);
        read_field(f, "frame_rate_hz", p.frame.frame_rate_hz);
    }
    if (j.contains("source")) {
        const json& s = j.at("source");
        read_field(s, "mu_ppm", p.source.mu_ppm);
        read_field(s, "nu_bin", p.source.nu_bin);
        read_field(s, "p_os", p.source.p_os);
    }
    if (j.contains("channel")) {
        const json& c = j.at("channel");
        read_field(c, "eta_b", p.channel.eta_b);
        read_field(c, "alpha_db_per_km", p.channel.alpha_db_per_km);
        read_field(c, "length_km", p.channel.length_km);
        read_field(c, "y0", p.channel.y0);
    }
    if (j.contains("detector")) {
        parse_detector(j.at("detector"), p.det_key);
        p.det_franson = p.det_key;
        p.det_alice = p.det_key;
    }
    if (j.contains("detector_franson")) parse_detector(j.at("detector_franson"), p.det_franson);
    if (j.contains("detector_alice")) parse_detector(j.at("detector_alice"), p.det_alice);
    if (j.contains("receiver")) {
        const json& r = j.at("receiver");
        read_field(r, "split", p.split);
        read_field(r, "alice_path_eta", p.alice_path_eta);
    }
    if (j.contains("biphoton")) {
        const json& b = j.at("biphoton");
        read_field(b, "sigma_coh_s", p.biphoton.sigma_coh_s);
        read_field(b, "sigma_cor_s", p.biphoton.sigma_cor_s);
        read_field(b, "delta_t_s", p.biphoton.delta_t_s);
        read_field(b, "omega_pump_rad_s", p.biphoton.omega_pump_rad_s);
    }
    if (j.contains("security")) {
        const json& h = j.at("security");
        read_field(h, "bob_time_rms_fraction", p.holevo.bob_time_rms_fraction);
        read_field(h, "alice_time_rms_fraction", p.holevo.alice_time_rms_fraction);
        read_field(h, "pump_coherence_fraction", p.holevo.pump_coherence_fraction);
        read_field(h, "visibility_ratio", p.holevo.visibility_ratio);
        read_field(h, "m_samples", p.holevo.m_samples);
        read_field(h, "eps_pe", p.holevo.eps_pe);
        read_field(h, "car_degradation", p.holevo.car_degradation);
        read_field(h, "delta_t_equals_frame", p.holevo.delta_t_equals_frame);
    }
    if (j.contains("decoy")) {
        const json& d = j.at("decoy");
        read_field(d, "f1_bins", p.decoy.f1_bins);
        read_field(d, "f2_bins", p.decoy.f2_bins);
        read_field(d, "n_alpha", p.decoy.n_alpha);
        read_field(d, "eps_decoy", p.decoy.eps_decoy);
    }
    if (j.contains("postprocess")) {
        const json& q = j.at("postprocess");
        read_field(q, "beta", p.pa.beta);
        read_field(q, "eps_ec", p.pa.eps_ec);
        read_field(q, "eps_pa", p.pa.eps_pa);
        read_field(q, "eps_bar", p.pa.eps_bar);
        read_field(q, "delta_fk_bits", p.pa.delta_fk_bits);
        read_field(q, "block_symbols", p.pa.block_symbols);
    }
    if (j.contains("run")) {
        const json& r = j.at("run");
        read_field(r, "seed", p.seed);
        read_field(r, "mc_frames", p.mc_frames);
        read_field(r, "workers", p.workers);
        std::string mode = "analytic";
        read_field(r, "mode", mode);
        if (mode == "analytic") p.mode = EvalMode::analytic;
        else if (mode == "montecarlo") p.mode = EvalMode::montecarlo;
        else if (mode == "both") p.mode = EvalMode::both;
        else throw ConfigError({"run.mode must be analytic | montecarlo | both"});
        read_field(r, "scenario", cfg.scenario);
        read_field(r, "distances_km", cfg.distances_km);
        read_field(r, "out_prefix", cfg.out_prefix);
    }

    // Validate everything, collecting each violation with its field name.
    std::vector<std::string> errors;
    auto check = [&](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            errors.emplace_back(std::string(section) + ": " + e.what());
        }
    };
    check("frame", [&] { p.frame.validate(); });
    check("source", [&] { p.source.validate(); });
    check("channel", [&] { p.channel.validate(); });
    check("detector", [&] { p.det_key.validate(p.frame.tau_s); });
    check("detector_franson", [&] { p.det_franson.validate(p.frame.tau_s); });
    check("detector_alice", [&] { p.det_alice.validate(p.frame.tau_s); });
    check("biphoton", [&] { p.biphoton.validate(); });
    check("postprocess", [&] { p.pa.validate(); });
    check("decoy", [&] {
        DecoyConfig d = p.decoy;
        d.n_bins = p.frame.n_bins;
        if (d.f1_bins <= 0) d.f1_bins = DecoyConfig::default_f1(p.frame.n_bins);
        if (d.f2_bins <= 0) d.f2_bins = DecoyConfig::default_f2(p.frame.n_bins);
        d.nu_bin = p.source.nu_bin * (p.det_key.gate_width_s / p.frame.tau_s);
        partition_decoys(d, p.source.mu_ppm);
    });
    check("receiver", [&] {
        SimParams sp;
        sp.frame = p.frame;
        sp.source = p.source;
        sp.split = p.split;
        sp.alice_path_eta = p.alice_path_eta;
        sp.det_key = p.det_key;
        sp.det_franson = p.det_franson;
        sp.det_alice = p.det_alice;
        sp.decoy_f1_bins = p.decoy.f1_bins;
        sp.decoy_f2_bins = p.decoy.f2_bins;
        sp.validate();
    });
    check("security", [&] {
        if (!(p.holevo.visibility_ratio > 0.0 && p.holevo.visibility_ratio <= 1.0))
            throw std::invalid_argument("visibility_ratio must be in (0, 1]");
        if (!(p.holevo.bob_time_rms_fraction > 0.0))
            throw std::invalid_argument("bob_time_rms_fraction must be > 0");
        if (p.holevo.m_samples < 2)
            throw std::invalid_argument("m_samples must be >= 2");
        if (!(p.holevo.eps_pe > 0.0 && p.holevo.eps_pe < 1.0))
            throw std::invalid_argument("eps_pe must be in (0, 1)");
    });
    if (cfg.scenario != "custom" && cfg.scenario != "fig2" && cfg.scenario != "fig3")
        errors.emplace_back("run.scenario must be custom | fig2 | fig3");
    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file: " + path});
    std::ostringstream buf;
    buf << in.rdbuf();
    if (buf.str().empty()) throw ConfigError({"config file is empty: " + path});
    return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
    const PointInputs& p = point;
    json j;
    j["frame"] = {{"bins", p.frame.n_bins},
                  {"bin_duration_s", p.frame.tau_s},
                  {"frame_rate_hz", p.frame.frame_rate_hz}};
    j["source"] = {{"mu_ppm", p.source.mu_ppm},
                   {"nu_bin", p.source.nu_bin},
                   {"p_os", p.source.p_os}};
    j["channel"] = {{"eta_b", p.channel.eta_b},
                    {"alpha_db_per_km", p.channel.alpha_db_per_km},
                    {"length_km", p.channel.length_km},
                    {"y0", p.channel.y0}};
    j["detector"] = detector_to_json(p.det_key);
    j["detector_franson"] = detector_to_json(p.det_franson);
    j["detector_alice"] = detector_to_json(p.det_alice);
    j["receiver"] = {{"split", p.split}, {"alice_path_eta", p.alice_path_eta}};
    j["biphoton"] = {{"sigma_coh_s", p.biphoton.sigma_coh_s},
                     {"sigma_cor_s", p.biphoton.sigma_cor_s},
                     {"delta_t_s", p.biphoton.delta_t_s},
                     {"omega_pump_rad_s", p.biphoton.omega_pump_rad_s}};
    j["security"] = {{"bob_time_rms_fraction", p.holevo.bob_time_rms_fraction},
                     {"alice_time_rms_fraction", p.holevo.alice_time_rms_fraction},
                     {"pump_coherence_fraction", p.holevo.pump_coherence_fraction},
                     {"visibility_ratio", p.holevo.visibility_ratio},
                     {"m_samples", p.holevo.m_samples},
                     {"eps_pe", p.holevo.eps_pe},
                     {"car_degradation", p.holevo.car_degradation},
                     {"delta_t_equals_frame", p.holevo.delta_t_equals_frame}};
    j["decoy"] = {{"f1_bins", p.decoy.f1_bins},
                  {"f2_bins", p.decoy.f2_bins},
                  {"n_alpha", p.decoy.n_alpha},
                  {"eps_decoy", p.decoy.eps_decoy}};
    j["postprocess"] = {{"beta", p.pa.beta},
                        {"eps_ec", p.pa.eps_ec},
                        {"eps_pa", p.pa.eps_pa},
                        {"eps_bar", p.pa.eps_bar},
                        {"delta_fk_bits", p.pa.delta_fk_bits},
                        {"block_symbols", p.pa.block_symbols}};
    const char* mode = point.mode == EvalMode::analytic ? "analytic"
                       : point.mode == EvalMode::montecarlo ? "montecarlo" : "both";
    j["run"] = {{"seed", p.seed},
                {"mc_frames", p.mc_frames},
                {"workers", p.workers},
                {"mode", mode},
                {"scenario", scenario},
                {"distances_km", distances_km},
                {"out_prefix", out_prefix}};
    return j.dump(2);
}

std::string RunConfig::config_hash() const {
    const std::string text = to_json_text();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace ppmqkd
