#include "ppmqkd/ppm_sim.hpp"

#include "ppmqkd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

namespace ppmqkd {

int FrameConfig::bits_per_symbol() const {
    int k = 0;
    for (int n = n_bins; n > 1; n >>= 1) ++k;
    return k;
}

void SimParams::validate() const {
    frame.validate();
    source.validate();
    det_key.validate(frame.tau_s);
    det_franson.validate(frame.tau_s);
    det_alice.validate(frame.tau_s);
    if (!(channel_eta >= 0.0 && channel_eta <= 1.0))
        throw std::invalid_argument("SimParams: channel_eta must be in [0, 1]");
    if (!(split > 0.0 && split < 1.0))
        throw std::invalid_argument("SimParams: split must be in (0, 1)");
    if (!(alice_path_eta > 0.0 && alice_path_eta <= 1.0))
        throw std::invalid_argument("SimParams: alice_path_eta must be in (0, 1]");
    if (f2() < 1 || f1() <= f2() || f1() > frame.n_bins)
        throw std::invalid_argument("SimParams: decoy windows must satisfy 1 <= f2 < f1 <= n_bins");
}

void EmpiricalStats::merge(const EmpiricalStats& o) {
    frames_total += o.frames_total;
    ase_frames += o.ase_frames;
    spdc_frames += o.spdc_frames;
    ase_key_click_frames += o.ase_key_click_frames;
    spdc_key_click_frames += o.spdc_key_click_frames;
    spdc_key_sub1_frames += o.spdc_key_sub1_frames;
    spdc_key_sub2_frames += o.spdc_key_sub2_frames;
    ase_fr_click_frames += o.ase_fr_click_frames;
    spdc_fr_click_frames += o.spdc_fr_click_frames;
    spdc_fr_sub1_frames += o.spdc_fr_sub1_frames;
    spdc_fr_sub2_frames += o.spdc_fr_sub2_frames;
    alice_click_frames += o.alice_click_frames;
    coinc_frames += o.coinc_frames;
    coinc_same_bin += o.coinc_same_bin;
    coinc_diff_bin += o.coinc_diff_bin;
    for (int i = 0; i <= kMaxTaggedPhotons; ++i) {
        ase_frames_by_n[i] += o.ase_frames_by_n[i];
        ase_key_clicks_by_n[i] += o.ase_key_clicks_by_n[i];
        spdc_frames_by_n[i] += o.spdc_frames_by_n[i];
        spdc_coinc_by_n[i] += o.spdc_coinc_by_n[i];
    }
    sifted_frames += o.sifted_frames;
    noclick_frames += o.noclick_frames;
    franson_only_frames += o.franson_only_frames;
    symbol_errors += o.symbol_errors;
    tdc_dropped_clicks += o.tdc_dropped_clicks;
    if (confusion.size() == o.confusion.size()) {
        for (std::size_t i = 0; i < confusion.size(); ++i) confusion[i] += o.confusion[i];
    }
}

namespace {

constexpr int kMaxClicks = 24;

struct ClickList {
    int bins[kMaxClicks];
    int count = 0;
    void add(int bin) {
        if (count < kMaxClicks) bins[count++] = bin;
    }
    int first() const {
        int best = std::numeric_limits<int>::max();
        for (int i = 0; i < count; ++i) best = std::min(best, bins[i]);
        return count == 0 ? -1 : best;
    }
};

struct DetectorState {
    std::int64_t last_click_gate = std::numeric_limits<std::int64_t>::min() / 2;
};

/// Per-detector effects: dark counts over the frame's gates, afterpulsing
/// from the most recent avalanche, and the click list update.
class DetectorSim {
public:
    DetectorSim(const DetectorModel& d, int n_bins)
        : model_(d), n_bins_(n_bins) {
        p_any_dark_ = -std::expm1(static_cast<double>(n_bins) *
                                  std::log1p(-d.dark_prob_per_gate));
        log1m_dark_ = d.dark_prob_per_gate > 0.0 ? std::log1p(-d.dark_prob_per_gate) : 0.0;
        ap_window_gates_ = static_cast<std::int64_t>(d.afterpulse_memory_frames) * n_bins;
    }

    void add_darks(rng::Xoshiro256& r, ClickList& clicks) const {
        if (model_.dark_prob_per_gate <= 0.0) return;
        int gate = 0;
        double p_any = p_any_dark_;
        while (gate < n_bins_) {
            if (!r.bernoulli(p_any)) return;
            // First dark gate among the remaining ones, by inversion.
            const double u = r.uniform() * p_any;
            int g = static_cast<int>(std::log1p(-u) / log1m_dark_);
            g = std::min(g, n_bins_ - 1 - gate);
            gate += g;
            clicks.add(gate);
            ++gate;
            if (gate >= n_bins_) return;
            p_any = -std::expm1(static_cast<double>(n_bins_ - gate) * log1m_dark_);
        }
    }

    void add_afterpulses(rng::Xoshiro256& r, std::int64_t frame_start_gate,
                         const DetectorState& st, ClickList& clicks) const {
        if (model_.afterpulse_prob <= 0.0) return;
        const std::int64_t gap = frame_start_gate - st.last_click_gate;
        if (gap <= 0 || gap > ap_window_gates_) return;
        const double rho = model_.afterpulse_decay_per_gate;
        // Per-gate probability p_ap (1 - rho) rho^(d-1) at distance d from the
        // avalanche; expected count in this frame:
        const double lead = std::pow(rho, static_cast<double>(gap - 1));
        const double in_frame = model_.afterpulse_prob * lead *
                                (1.0 - std::pow(rho, static_cast<double>(n_bins_)));
        if (in_frame <= 0.0 || !r.bernoulli(std::min(1.0, in_frame))) return;
        // Position within the frame with the same geometric weighting.
        const double u = r.uniform();
        int bin = 0;
        if (rho > 0.0) {
            const double denom = 1.0 - std::pow(rho, static_cast<double>(n_bins_));
            bin = static_cast<int>(std::log1p(-u * denom) / std::log(rho));
            bin = std::clamp(bin, 0, n_bins_ - 1);
        }
        clicks.add(bin);
    }

private:
    DetectorModel model_;
    int n_bins_;
    double p_any_dark_ = 0.0;
    double log1m_dark_ = 0.0;
    std::int64_t ap_window_gates_ = 0;
};

class FrameKernel {
public:
    FrameKernel(const SimParams& p)
        : p_(p),
          n_(p.frame.n_bins),
          det_key_(p.det_key, n_),
          det_fr_(p.det_franson, n_),
          det_al_(p.det_alice, n_) {
        // PPM pulses are aligned to the detection gates, so their acceptance
        // is 1. The cw entangled light only exists for the detectors within
        // the gate windows: a pair lands in-gate with the duty-cycle
        // probability, and both photons do so together (their relative delay
        // is far below the gate width). In-gate pairs then see the same
        // per-photon efficiencies as the aligned pulses, which keeps the
        // photon-number yield family common across the source intensities.
        p_ase_key_ = p.channel_eta * p.split * p.det_key.efficiency;
        p_ase_fr_ = p.channel_eta * (1.0 - p.split) * p.det_franson.efficiency;
        p_spdc_key_ = p_ase_key_;
        p_spdc_fr_ = p_ase_fr_;
        p_alice_ = p.alice_path_eta * p.det_alice.efficiency;
        g_mode_ = p.det_key.gate_width_s / p.frame.tau_s;

        nu_frame_ = p.source.nu_bin * n_;
        f1_ = p.f1();
        f2_ = p.f2();

        // Recording cap modeled as an i.i.d. drop at the expected excess
        // ratio; the expected Bob-side click rate is computed up front.
        const double q_key = expected_clicks(p_ase_key_, p_spdc_key_, p.det_key);
        const double q_fr = expected_clicks(p_ase_fr_, p_spdc_fr_, p.det_franson);
        const double rate = (q_key + q_fr) * p.frame.rate_hz();
        const double cap = std::min(p.det_key.max_record_rate_hz, p.det_franson.max_record_rate_hz);
        p_tdc_keep_ = rate > cap ? cap / rate : 1.0;
    }

    std::int64_t ap_warmup_frames() const {
        return std::max({p_.det_key.afterpulse_memory_frames,
                         p_.det_franson.afterpulse_memory_frames,
                         p_.det_alice.afterpulse_memory_frames});
    }

    void simulate_frame(std::uint64_t seed, std::uint64_t frame_idx,
                        DetectorState& st_key, DetectorState& st_fr, DetectorState& st_al,
                        EmpiricalStats& acc, std::vector<FrameRecord>* records) const {
        rng::Xoshiro256 r = rng::keyed_rng(seed, frame_idx);
        const std::int64_t frame_start_gate = static_cast<std::int64_t>(frame_idx) * n_;

        const bool is_ase = r.bernoulli(p_.source.p_os);
        ClickList key, fr, al;
        int symbol = -1;
        int emitted = 0;

        if (is_ase) {
            symbol = static_cast<int>(r.uniform() * n_);
            if (symbol >= n_) symbol = n_ - 1;
            emitted = r.poisson(p_.source.mu_ppm);
            for (int i = 0; i < emitted; ++i) {
                const double u = r.uniform();
                if (u < p_ase_key_) key.add(symbol);
                else if (u < p_ase_key_ + p_ase_fr_) fr.add(symbol);
            }
        } else {
            emitted = r.poisson(nu_frame_);
            for (int i = 0; i < emitted; ++i) {
                if (g_mode_ < 1.0 && r.uniform() >= g_mode_) continue;  // out-of-gate pair
                int bin = static_cast<int>(r.uniform() * n_);
                if (bin >= n_) bin = n_ - 1;
                const double u = r.uniform();
                if (u < p_spdc_key_) key.add(bin);
                else if (u < p_spdc_key_ + p_spdc_fr_) fr.add(bin);
                if (r.uniform() < p_alice_) al.add(bin);
            }
        }

        det_key_.add_darks(r, key);
        det_fr_.add_darks(r, fr);
        det_al_.add_darks(r, al);
        det_key_.add_afterpulses(r, frame_start_gate, st_key, key);
        det_fr_.add_afterpulses(r, frame_start_gate, st_fr, fr);
        det_al_.add_afterpulses(r, frame_start_gate, st_al, al);

        // Afterpulse state follows the avalanche, whether or not the
        // electronics keep the record.
        if (key.count > 0) st_key.last_click_gate = frame_start_gate + key.first();
        if (fr.count > 0) st_fr.last_click_gate = frame_start_gate + fr.first();
        if (al.count > 0) st_al.last_click_gate = frame_start_gate + al.first();

        apply_tdc(r, key, acc);
        apply_tdc(r, fr, acc);

        accumulate(frame_idx, is_ase, symbol, emitted, key, fr, al, acc, records);
    }

    double p_tdc_keep() const { return p_tdc_keep_; }

private:
    double expected_clicks(double p_ase_photon, double p_spdc_photon,
                           const DetectorModel& d) const {
        const double g = p_.det_key.gate_width_s / p_.frame.tau_s;
        const double sig_ase = -std::expm1(-p_.source.mu_ppm * p_ase_photon);
        const double sig_spdc = -std::expm1(-nu_frame_ * g * p_spdc_photon);
        const double dark = -std::expm1(n_ * std::log1p(-d.dark_prob_per_gate));
        const double q_ase = 1.0 - (1.0 - sig_ase) * (1.0 - dark);
        const double q_spdc = 1.0 - (1.0 - sig_spdc) * (1.0 - dark);
        return p_.source.p_os * q_ase + (1.0 - p_.source.p_os) * q_spdc;
    }

    void apply_tdc(rng::Xoshiro256& r, ClickList& clicks, EmpiricalStats& acc) const {
        if (p_tdc_keep_ >= 1.0 || clicks.count == 0) return;
        int kept = 0;
        for (int i = 0; i < clicks.count; ++i) {
            if (r.bernoulli(p_tdc_keep_)) clicks.bins[kept++] = clicks.bins[i];
            else ++acc.tdc_dropped_clicks;
        }
        clicks.count = kept;
    }

    void accumulate(std::uint64_t frame_idx, bool is_ase, int symbol, int emitted,
                    const ClickList& key, const ClickList& fr, const ClickList& al,
                    EmpiricalStats& acc, std::vector<FrameRecord>* records) const {
        ++acc.frames_total;
        const int tag = std::min(emitted, EmpiricalStats::kMaxTaggedPhotons);
        const int key_first = key.first();
        const int fr_first = fr.first();

        if (is_ase) {
            ++acc.ase_frames;
            ++acc.ase_frames_by_n[tag];
            if (key_first >= 0) {
                ++acc.ase_key_click_frames;
                ++acc.ase_key_clicks_by_n[tag];
                ++acc.sifted_frames;
                acc.confusion[static_cast<std::size_t>(symbol) * n_ + key_first] += 1;
                if (key_first != symbol) ++acc.symbol_errors;
            } else if (fr_first >= 0) {
                ++acc.franson_only_frames;
            } else {
                ++acc.noclick_frames;
            }
            if (fr_first >= 0) ++acc.ase_fr_click_frames;
        } else {
            ++acc.spdc_frames;
            ++acc.spdc_frames_by_n[tag];
            if (key_first >= 0) ++acc.spdc_key_click_frames;
            if (fr_first >= 0) ++acc.spdc_fr_click_frames;
            tally_subgroups(key, acc.spdc_key_sub1_frames, acc.spdc_key_sub2_frames);
            tally_subgroups(fr, acc.spdc_fr_sub1_frames, acc.spdc_fr_sub2_frames);

            const int al_first = al.first();
            if (al_first >= 0) ++acc.alice_click_frames;
            if (al_first >= 0 && fr_first >= 0) {
                ++acc.coinc_frames;
                ++acc.spdc_coinc_by_n[tag];
                bool same = false;
                for (int i = 0; i < al.count && !same; ++i)
                    for (int j = 0; j < fr.count; ++j)
                        if (al.bins[i] == fr.bins[j]) { same = true; break; }
                if (same) ++acc.coinc_same_bin; else ++acc.coinc_diff_bin;
            }
        }

        if (records) {
            FrameRecord rec;
            rec.frame_idx = frame_idx;
            rec.source = is_ase ? SourceTag::ase : SourceTag::spdc;
            rec.symbol = symbol;
            rec.emitted_photons = emitted;
            if (key_first >= 0) {
                rec.click_bin = key_first;
                rec.path = PathTag::key;
            } else if (fr_first >= 0) {
                rec.click_bin = fr_first;
                rec.path = PathTag::franson;
            }
            records->push_back(rec);
        }
    }

    // Decoy windows are nested: the first f1 bins and the first f2 bins.
    void tally_subgroups(const ClickList& clicks, std::uint64_t& sub1, std::uint64_t& sub2) const {
        bool in1 = false, in2 = false;
        for (int i = 0; i < clicks.count; ++i) {
            const int b = clicks.bins[i];
            in1 = in1 || b < f1_;
            in2 = in2 || b < f2_;
        }
        if (in1) ++sub1;
        if (in2) ++sub2;
    }

    SimParams p_;
    int n_;
    DetectorSim det_key_;
    DetectorSim det_fr_;
    DetectorSim det_al_;
    double p_ase_key_ = 0.0, p_ase_fr_ = 0.0;
    double p_spdc_key_ = 0.0, p_spdc_fr_ = 0.0, p_alice_ = 0.0;
    double g_mode_ = 1.0;
    double nu_frame_ = 0.0;
    double p_tdc_keep_ = 1.0;
    int f1_ = 0, f2_ = 0;
};

void run_chunk(const FrameKernel& kernel, const SimParams& params, std::uint64_t seed,
               std::uint64_t begin, std::uint64_t end, EmpiricalStats& out,
               std::vector<FrameRecord>* records) {
    out.init(params.frame.n_bins);
    DetectorState key, fr, al;
    // Warm up the afterpulse state deterministically; outcomes older than the
    // afterpulse memory cannot influence the chunk.
    const std::uint64_t warm = std::min<std::uint64_t>(begin, kernel.ap_warmup_frames());
    EmpiricalStats scratch;
    scratch.init(params.frame.n_bins);
    for (std::uint64_t f = begin - warm; f < begin; ++f)
        kernel.simulate_frame(seed, f, key, fr, al, scratch, nullptr);
    for (std::uint64_t f = begin; f < end; ++f)
        kernel.simulate_frame(seed, f, key, fr, al, out, records);
}

} // namespace

EmpiricalStats run_simulation(const SimParams& params, std::uint64_t count,
                              std::uint64_t seed, int workers,
                              std::vector<FrameRecord>* records) {
    params.validate();
    if (count == 0) throw std::invalid_argument("run_simulation: count must be >= 1");
    FrameKernel kernel(params);

    if (workers < 1) workers = 1;
    if (records) workers = 1;  // ledger rows are emitted in frame order

    if (workers == 1) {
        EmpiricalStats stats;
        if (records) records->reserve(records->size() + count);
        run_chunk(kernel, params, seed, 0, count, stats, records);
        return stats;
    }

    const auto n_workers = static_cast<std::uint64_t>(workers);
    std::vector<EmpiricalStats> parts(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::uint64_t w = 0; w < n_workers; ++w) {
        const std::uint64_t begin = count * w / n_workers;
        const std::uint64_t end = count * (w + 1) / n_workers;
        threads.emplace_back([&, w, begin, end] {
            run_chunk(kernel, params, seed, begin, end, parts[w], nullptr);
        });
    }
    for (auto& t : threads) t.join();
    EmpiricalStats stats;
    stats.init(params.frame.n_bins);
    for (const auto& p : parts) stats.merge(p);
    return stats;
}

SiftOutput sift(std::span<const FrameRecord> alice, std::span<const FrameRecord> bob,
                const SimParams& params) {
    if (alice.size() != bob.size())
        throw std::runtime_error("sift: record streams have different lengths");
    SiftOutput out;
    out.stats.init(params.frame.n_bins);
    const int f1 = params.f1();
    const int f2 = params.f2();
    for (std::size_t i = 0; i < alice.size(); ++i) {
        const FrameRecord& a = alice[i];
        const FrameRecord& b = bob[i];
        if (a.frame_idx != b.frame_idx)
            throw std::runtime_error("sift: frame index misalignment");
        ++out.stats.frames_total;
        if (a.source == SourceTag::ase) {
            ++out.stats.ase_frames;
            if (b.path == PathTag::key && b.click_bin >= 0) {
                ++out.stats.sifted_frames;
                ++out.stats.ase_key_click_frames;
                out.pairs.emplace_back(a.symbol, b.click_bin);
                out.stats.confusion[static_cast<std::size_t>(a.symbol) * params.frame.n_bins +
                                    b.click_bin] += 1;
                if (b.click_bin != a.symbol) ++out.stats.symbol_errors;
            } else if (b.path == PathTag::franson) {
                ++out.stats.franson_only_frames;
            } else {
                ++out.stats.noclick_frames;
            }
        } else {
            ++out.stats.spdc_frames;
            if (b.click_bin >= 0 && b.path == PathTag::key) {
                ++out.stats.spdc_key_click_frames;
                if (b.click_bin < f1) ++out.stats.spdc_key_sub1_frames;
                if (b.click_bin < f2) ++out.stats.spdc_key_sub2_frames;
            }
        }
    }
    return out;
}

double visibility_from_car(double v_intrinsic, double car) {
    if (car <= 1.0) return 0.0;
    return v_intrinsic * (car - 1.0) / (car + 1.0);
}

double estimate_car(const FrameConfig& f, const SourceParams& s, double eta,
                    const DetectorModel& d) {
    f.validate();
    s.validate();
    const double g = d.gate_width_s / f.tau_s;
    const double nu_eff = g * s.nu_bin;  // in-gate pairs per bin
    const double eta_bob = eta * d.efficiency;
    const double eta_alice = d.efficiency;
    const double true_per_bin = nu_eff * eta_alice * eta_bob;
    const double singles_a = nu_eff * eta_alice + d.dark_prob_per_gate;
    const double singles_b = nu_eff * eta_bob + d.dark_prob_per_gate;
    const double accidental = singles_a * singles_b;
    if (accidental <= 0.0) return std::numeric_limits<double>::infinity();
    return true_per_bin / accidental;
}

void write_ledger_csv(const std::string& path, std::span<const FrameRecord> records) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("write_ledger_csv: cannot open " + path);
    std::fputs("# ppmqkd frame ledger v1\n", fp);
    std::fputs("frame_idx,source,symbol,click_bin,path\n", fp);
    for (const auto& r : records) {
        const char* src = r.source == SourceTag::ase ? "ase" : "spdc";
        const char* path_tag = r.path == PathTag::key ? "key"
                               : r.path == PathTag::franson ? "franson" : "none";
        std::fprintf(fp, "%llu,%s,%d,%d,%s\n",
                     static_cast<unsigned long long>(r.frame_idx), src, r.symbol,
                     r.click_bin, path_tag);
    }
    std::fclose(fp);
}

} // namespace ppmqkd
