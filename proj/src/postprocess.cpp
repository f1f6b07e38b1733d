#include "ppmqkd/postprocess.hpp"

#include <bit>
#include <cmath>

namespace ppmqkd {

ReconcileResult reconcile_model(const SiftedBlock& block, double beta, double i_ab_bits) {
    block.validate();
    if (block.pairs.empty())
        throw std::invalid_argument("reconcile_model: block must be nonempty");
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("reconcile_model: beta must be in (0, 1]");
    const double bits_per_symbol = std::log2(static_cast<double>(block.n_symbols));
    if (beta * i_ab_bits > bits_per_symbol + 1e-12)
        throw std::invalid_argument("reconcile_model: beta * I_AB exceeds the symbol size");

    ReconcileResult r;
    r.corrected.reserve(block.pairs.size());
    for (const auto& [a, b] : block.pairs) r.corrected.push_back(a);
    const double count = static_cast<double>(block.pairs.size());
    r.leakage_bits = std::max(0.0, (bits_per_symbol - beta * i_ab_bits) * count);
    return r;
}

BitVec toeplitz_hash(const BitVec& input, const BitVec& seed, std::size_t m) {
    const std::size_t n = input.size();
    if (m > n) throw std::invalid_argument("toeplitz_hash: output longer than input");
    if (seed.size() != n + m - 1)
        throw std::invalid_argument("toeplitz_hash: seed must have n + m - 1 bits");

    // Output bit i is the parity of input AND the seed window
    // seed[n-1+i], seed[n-2+i], ..., seed[i]. Reversing the seed turns each
    // window into a contiguous slice starting at offset m - 1 - i.
    const std::size_t len = seed.size();
    BitVec rseed(len);
    for (std::size_t k = 0; k < len; ++k) rseed.set(k, seed.get(len - 1 - k));

    BitVec out(m);
    const auto& xw = input.words();
    const auto& sw = rseed.words();
    const std::size_t n_words = xw.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t offset = m - 1 - i;
        const std::size_t word_shift = offset >> 6;
        const unsigned bit_shift = static_cast<unsigned>(offset & 63);
        std::uint64_t parity = 0;
        for (std::size_t w = 0; w < n_words; ++w) {
            std::uint64_t s = 0;
            const std::size_t idx = w + word_shift;
            if (idx < sw.size()) s = sw[idx] >> bit_shift;
            if (bit_shift != 0 && idx + 1 < sw.size()) s |= sw[idx + 1] << (64 - bit_shift);
            parity ^= xw[w] & s;
        }
        out.set(i, std::popcount(parity) & 1);
    }
    return out;
}

std::uint64_t privacy_amplify(std::uint64_t n_corrected_bits, double pie_bits_per_detection,
                              std::uint64_t detections, double delta_fk_bits) {
    if (!(pie_bits_per_detection >= 0.0) || !(delta_fk_bits >= 0.0))
        throw std::invalid_argument("privacy_amplify: inputs must be nonnegative");
    const double raw = std::floor(static_cast<double>(detections) * pie_bits_per_detection -
                                  delta_fk_bits);
    if (raw <= 0.0) return 0;
    const auto m = static_cast<std::uint64_t>(raw);
    return std::min(m, n_corrected_bits);
}

double delta_fk_placeholder(std::uint64_t detections, const PaParams& p) {
    p.validate();
    const double log_term = std::log2(1.0 / (p.eps_ec * p.eps_pa * p.eps_bar));
    return std::sqrt(static_cast<double>(detections)) * log_term;
}

KeyAccounting key_accounting(std::uint64_t symbols, int bits_per_symbol, double beta,
                             double i_ab_bits, double pie_bits, double delta_fk_bits) {
    if (!(pie_bits <= beta * i_ab_bits + 1e-12))
        throw std::invalid_argument("key_accounting: pie exceeds beta * I_AB");
    KeyAccounting acc;
    acc.raw_bits = symbols * static_cast<std::uint64_t>(bits_per_symbol);
    const double retained = std::floor(beta * i_ab_bits * static_cast<double>(symbols));
    const auto retained_bits =
        std::min(acc.raw_bits, static_cast<std::uint64_t>(std::max(0.0, retained)));
    acc.leakage_bits = acc.raw_bits - retained_bits;
    acc.final_bits = privacy_amplify(retained_bits, std::max(0.0, pie_bits), symbols,
                                     std::max(0.0, delta_fk_bits));
    acc.pa_discard_bits = retained_bits - acc.final_bits;
    return acc;
}

} // namespace ppmqkd
