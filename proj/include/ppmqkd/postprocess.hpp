#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ppmqkd {

/// Packed bit sequence, LSB-first within 64-bit words.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t n_bits) : n_(n_bits), words_((n_bits + 63) / 64, 0) {}

    std::size_t size() const { return n_; }
    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
    void set(std::size_t i, bool v) {
        const std::uint64_t mask = 1ULL << (i & 63);
        if (v) words_[i >> 6] |= mask; else words_[i >> 6] &= ~mask;
    }
    const std::vector<std::uint64_t>& words() const { return words_; }
    bool operator==(const BitVec& o) const { return n_ == o.n_ && words_ == o.words_; }

    BitVec operator^(const BitVec& o) const {
        if (n_ != o.n_) throw std::invalid_argument("BitVec xor: length mismatch");
        BitVec r(n_);
        for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] = words_[w] ^ o.words_[w];
        return r;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// A block of sifted symbol pairs over an alphabet of size n_symbols.
struct SiftedBlock {
    int n_symbols = 8;
    std::vector<std::pair<int, int>> pairs;  ///< (alice, bob)

    void validate() const {
        if (n_symbols < 2) throw std::invalid_argument("SiftedBlock: alphabet too small");
        for (const auto& [a, b] : pairs)
            if (a < 0 || a >= n_symbols || b < 0 || b >= n_symbols)
                throw std::invalid_argument("SiftedBlock: symbol out of range");
    }
};

/// Post-processing parameters: reconciliation efficiency and the failure
/// probabilities of error correction, privacy amplification, and the
/// min-entropy estimate, plus the finite-key penalty in bits per block.
struct PaParams {
    double beta = 0.9;
    double eps_ec = 1e-10;
    double eps_pa = 1e-10;
    double eps_bar = 1e-10;
    double delta_fk_bits = -1.0;  ///< < 0 means "use the documented placeholder"
    int block_symbols = 4000;

    void validate() const {
        if (!(beta > 0.0 && beta <= 1.0))
            throw std::invalid_argument("PaParams: beta must be in (0, 1]");
        for (double e : {eps_ec, eps_pa, eps_bar})
            if (!(e > 0.0 && e < 1.0))
                throw std::invalid_argument("PaParams: failure probabilities must be in (0, 1)");
        if (block_symbols < 1)
            throw std::invalid_argument("PaParams: block_symbols must be >= 1");
    }
};

struct ReconcileResult {
    std::vector<int> corrected;  ///< equals Alice's symbols
    double leakage_bits = 0.0;   ///< log2(N) * count - beta * i_ab * count
};

/// Models error correction at efficiency beta: Bob's symbols are replaced by
/// Alice's, and the information revealed is everything beyond the retained
/// beta * I_AB per symbol.
ReconcileResult reconcile_model(const SiftedBlock& block, double beta, double i_ab_bits);

/// Toeplitz-matrix hash over GF(2). seed must have exactly n + m - 1 bits;
/// entry (i, j) of the matrix is seed bit i - j + n - 1.
BitVec toeplitz_hash(const BitVec& input, const BitVec& seed, std::size_t m);

/// Final key length: floor(detections * pie - delta_fk), clamped to [0, n].
std::uint64_t privacy_amplify(std::uint64_t n_corrected_bits, double pie_bits_per_detection,
                              std::uint64_t detections, double delta_fk_bits);

/// Documented placeholder for the finite-key penalty:
/// sqrt(detections) * log2(1 / (eps_ec * eps_pa * eps_bar)). The constant in
/// front is 1 by convention here and is a modeling choice, not a derived value.
double delta_fk_placeholder(std::uint64_t detections, const PaParams& p);

/// Integer bookkeeping for one block: final + leakage + discard == raw.
struct KeyAccounting {
    std::uint64_t raw_bits = 0;      ///< symbols * bits per symbol
    std::uint64_t leakage_bits = 0;  ///< raw - floor(beta * I_AB * symbols)
    std::uint64_t final_bits = 0;    ///< floor(symbols * pie - delta_fk), clamped
    std::uint64_t pa_discard_bits = 0;
};
KeyAccounting key_accounting(std::uint64_t symbols, int bits_per_symbol, double beta,
                             double i_ab_bits, double pie_bits, double delta_fk_bits);

} // namespace ppmqkd
