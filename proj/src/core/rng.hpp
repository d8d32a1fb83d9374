#pragma once

#include <cstdint>

namespace chshforge {

// SplitMix64 finalizer (Steele/Lea/Flood; public-domain reference code by
// Vigna). Used both as the generator step and as the seed hash-mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seed for substream `index` of a master seed. Substreams for distinct
// indices can be generated independently, in any order, on any thread,
// and the produced values depend only on (master, index).
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index ^ 0xD1B54A32D192ED03ull));
}

// Minimal deterministic generator. std::mt19937 plus the standard
// distributions would tie output to the standard-library implementation;
// this stream depends only on the 64-bit seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1), 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Fair coin mapped to {-1, +1}.
    int next_sign() { return (next_u64() >> 63) ? +1 : -1; }

    // Unbiased integer in [0, n). Rejection from the low end keeps the
    // result independent of how 2^64 splits across n.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

private:
    std::uint64_t state_;
};

} // namespace chshforge
