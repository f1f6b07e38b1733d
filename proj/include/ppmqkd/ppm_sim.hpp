#pragma once

#include "ppmqkd/channel_model.hpp"
#include "ppmqkd/decoy.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppmqkd {

/// Frame geometry: N bins of duration tau; the frame rate defaults to
/// 1 / (N * tau) when left unset.
struct FrameConfig {
    int n_bins = 8;
    double tau_s = 794e-12;
    double frame_rate_hz = -1.0;  ///< < 0 means 1 / t_frame

    double t_frame_s() const { return n_bins * tau_s; }
    double rate_hz() const { return frame_rate_hz < 0.0 ? 1.0 / t_frame_s() : frame_rate_hz; }
    int bits_per_symbol() const;

    void validate() const {
        if (n_bins < 2 || n_bins > 1024 || (n_bins & (n_bins - 1)) != 0)
            throw std::invalid_argument("FrameConfig: n_bins must be a power of two in [2, 1024]");
        if (!(tau_s > 0.0))
            throw std::invalid_argument("FrameConfig: tau must be > 0");
        if (frame_rate_hz >= 0.0 && frame_rate_hz > 1.0 / t_frame_s() * (1.0 + 1e-12))
            throw std::invalid_argument("FrameConfig: frame rate exceeds 1 / t_frame");
    }
};

/// Gated single-photon detector with background, afterpulsing, and a
/// recording-rate cap.
struct DetectorModel {
    double efficiency = 0.18;
    double dark_prob_per_gate = 6.35e-6;
    double gate_width_s = 100e-12;
    double afterpulse_prob = 0.008;       ///< expected afterpulses per detection
    double afterpulse_decay_per_gate = 0.6;  ///< geometric ratio between successive gates
    int afterpulse_memory_frames = 3;     ///< afterpulses older than this are dropped
    double jitter_rms_s = 30e-12;
    double max_record_rate_hz = 5e7;

    void validate(double tau_s) const {
        for (double p : {efficiency, dark_prob_per_gate, afterpulse_prob})
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("DetectorModel: probabilities must be in [0, 1]");
        if (!(gate_width_s > 0.0 && gate_width_s <= tau_s))
            throw std::invalid_argument("DetectorModel: gate width must be in (0, tau]");
        if (!(afterpulse_decay_per_gate >= 0.0 && afterpulse_decay_per_gate < 1.0))
            throw std::invalid_argument("DetectorModel: afterpulse decay must be in [0, 1)");
        if (!(jitter_rms_s >= 0.0))
            throw std::invalid_argument("DetectorModel: jitter must be >= 0");
        if (!(max_record_rate_hz > 0.0))
            throw std::invalid_argument("DetectorModel: record-rate cap must be > 0");
    }
};

enum class SourceTag : std::uint8_t { ase = 0, spdc = 1 };
enum class PathTag : std::uint8_t { none = 0, key = 1, franson = 2 };

/// Per-frame ledger entry. symbol is -1 for entangled-source frames;
/// click_bin is -1 when the frame produced no recorded click.
struct FrameRecord {
    std::uint64_t frame_idx = 0;
    SourceTag source = SourceTag::ase;
    int symbol = -1;
    int click_bin = -1;
    PathTag path = PathTag::none;
    int emitted_photons = 0;  ///< channel-input photon (pair) count, test oracle only
};

/// Integer tallies from a run; merging is commutative and exact, so results
/// do not depend on how frames were partitioned across workers.
struct EmpiricalStats {
    static constexpr int kMaxTaggedPhotons = 15;

    std::uint64_t frames_total = 0;
    std::uint64_t ase_frames = 0;
    std::uint64_t spdc_frames = 0;

    // Key-path gains.
    std::uint64_t ase_key_click_frames = 0;
    std::uint64_t spdc_key_click_frames = 0;
    std::uint64_t spdc_key_sub1_frames = 0;
    std::uint64_t spdc_key_sub2_frames = 0;

    // Franson-path gains (same frame-level definition on the other output).
    std::uint64_t ase_fr_click_frames = 0;
    std::uint64_t spdc_fr_click_frames = 0;
    std::uint64_t spdc_fr_sub1_frames = 0;
    std::uint64_t spdc_fr_sub2_frames = 0;

    // Coincidences between Alice's idler detector and Bob's franson output.
    std::uint64_t alice_click_frames = 0;
    std::uint64_t coinc_frames = 0;
    std::uint64_t coinc_same_bin = 0;
    std::uint64_t coinc_diff_bin = 0;

    // Photon-number-tagged tallies (oracle channel for tests).
    std::uint64_t ase_frames_by_n[kMaxTaggedPhotons + 1] = {};
    std::uint64_t ase_key_clicks_by_n[kMaxTaggedPhotons + 1] = {};
    std::uint64_t spdc_frames_by_n[kMaxTaggedPhotons + 1] = {};
    std::uint64_t spdc_coinc_by_n[kMaxTaggedPhotons + 1] = {};

    // Sifting outcome classes for PPM frames.
    std::uint64_t sifted_frames = 0;
    std::uint64_t noclick_frames = 0;
    std::uint64_t franson_only_frames = 0;
    std::uint64_t symbol_errors = 0;

    std::uint64_t tdc_dropped_clicks = 0;

    int n_bins = 0;
    std::vector<std::uint64_t> confusion;  ///< n_bins x n_bins, row = sent symbol

    void init(int bins) {
        n_bins = bins;
        confusion.assign(static_cast<std::size_t>(bins) * bins, 0);
    }
    void merge(const EmpiricalStats& o);

    double q_mu_hat() const { return ratio(ase_key_click_frames, ase_frames); }
    double q_nu_hat() const { return ratio(spdc_key_click_frames, spdc_frames); }
    double q_nu1_hat() const { return ratio(spdc_key_sub1_frames, spdc_frames); }
    double q_nu2_hat() const { return ratio(spdc_key_sub2_frames, spdc_frames); }
    double q_mu_fr_hat() const { return ratio(ase_fr_click_frames, ase_frames); }
    double q_nu_fr_hat() const { return ratio(spdc_fr_click_frames, spdc_frames); }
    double q_nu1_fr_hat() const { return ratio(spdc_fr_sub1_frames, spdc_frames); }
    double q_nu2_fr_hat() const { return ratio(spdc_fr_sub2_frames, spdc_frames); }
    double q_coinc_hat() const { return ratio(coinc_frames, spdc_frames); }
    double symbol_error_rate() const { return ratio(symbol_errors, sifted_frames); }
    double empirical_q1_hat() const {
        return ratio(ase_key_clicks_by_n[1], ase_frames);
    }
    /// Coincidence-to-accidental proxy from same-bin vs offset-bin pair counts.
    double car_hat() const {
        if (coinc_diff_bin == 0 || n_bins < 2) return 0.0;
        return static_cast<double>(coinc_same_bin) * static_cast<double>(n_bins - 1) /
               static_cast<double>(coinc_diff_bin);
    }

private:
    static double ratio(std::uint64_t a, std::uint64_t b) {
        return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
    }
};

/// Everything the per-frame kernel needs.
struct SimParams {
    FrameConfig frame;
    SourceParams source;
    double channel_eta = 1.0;   ///< fiber and receiver optics, before the split
    double split = 0.5;         ///< probability a photon exits toward the key detector
    DetectorModel det_key;
    DetectorModel det_franson;
    DetectorModel det_alice;
    double alice_path_eta = 1.0;
    int decoy_f1_bins = -1;     ///< < 0: default window size for n_bins
    int decoy_f2_bins = -1;

    int f1() const {
        return decoy_f1_bins <= 0 ? DecoyConfig::default_f1(frame.n_bins) : decoy_f1_bins;
    }
    int f2() const {
        return decoy_f2_bins <= 0 ? DecoyConfig::default_f2(frame.n_bins) : decoy_f2_bins;
    }
    void validate() const;
};

/// Runs `count` frames with per-frame keyed randomness. Deterministic for a
/// given seed regardless of `workers`. When `records` is non-null every
/// frame's ledger row is appended (single-worker paths only sensible for
/// moderate counts).
EmpiricalStats run_simulation(const SimParams& params, std::uint64_t count,
                              std::uint64_t seed, int workers = 1,
                              std::vector<FrameRecord>* records = nullptr);

/// Sift matched per-frame records: PPM frames with a key-path click become
/// symbol pairs; entangled-source frames feed the decoy counters. Frame
/// indices must match pairwise.
struct SiftOutput {
    std::vector<std::pair<int, int>> pairs;  ///< (sent, decoded)
    EmpiricalStats stats;
};
SiftOutput sift(std::span<const FrameRecord> alice, std::span<const FrameRecord> bob,
                const SimParams& params);

/// V = v_intrinsic * (car - 1) / (car + 1); zero for car <= 1.
double visibility_from_car(double v_intrinsic, double car);

/// Closed-form coincidence-to-accidental model: true pair coincidences per
/// bin against products of the two sides' singles rates.
double estimate_car(const FrameConfig& f, const SourceParams& s, double eta,
                    const DetectorModel& d);

/// Versioned CSV dump of frame records.
void write_ledger_csv(const std::string& path, std::span<const FrameRecord> records);

} // namespace ppmqkd
