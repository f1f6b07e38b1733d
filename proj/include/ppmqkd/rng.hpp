#pragma once

#include <cstdint>
#include <cmath>

namespace ppmqkd::rng {

/// SplitMix64 step; used for seeding and key derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** generator. Small, fast, good statistical quality.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed = 1) {
        std::uint64_t s = seed;
        for (auto& w : s_) w = splitmix64(s);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Poisson sample by sequential inversion; intended for small means.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double u = uniform();
        double p = std::exp(-mean);
        double cum = p;
        int k = 0;
        while (u >= cum && k < 1024) {
            ++k;
            p *= mean / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

    int binomial(int n, double p) {
        int k = 0;
        for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
        return k;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4]{};
};

/// Generator keyed by (seed, index, salt). Partitioning a frame range across
/// workers cannot change the stream any frame sees.
inline Xoshiro256 keyed_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (index * 0x9e3779b97f4a7c15ULL) ^ (salt * 0xd1b54a32d192ed03ULL);
    return Xoshiro256(splitmix64(s));
}

} // namespace ppmqkd::rng
