#pragma once

// Deterministic random number generation.
//
// Everything downstream (synthetic data, negative sampling, shuffles,
// parameter init) must reproduce byte-identically given the same seed, so we
// use an explicitly specified generator instead of std:: distributions, whose
// algorithms are implementation-defined. The core generator is xoshiro256**
// (Blackman & Vigna), seeded through splitmix64. Integer streams are exact on
// any conforming platform; floating-point helpers only use arithmetic with
// fully specified semantics plus libm calls.

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sine {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1): top 53 bits scaled by 2^-53, exact on all platforms.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). Rejection sampling keeps the result
    // unbiased and identical everywhere.
    std::uint64_t uniform_u64(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    int uniform_int(int bound) {
        return static_cast<int>(uniform_u64(static_cast<std::uint64_t>(bound)));
    }

    double uniform_range(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_u64(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent child stream, e.g. one per user or per sweep run.
    Rng fork(std::uint64_t tag) {
        std::uint64_t mix = next_u64() ^ (0x9e3779b97f4a7c15ULL + tag);
        return Rng(splitmix64(mix));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable 64-bit content digest (FNV-1a) used for manifest input fingerprints.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace sine
