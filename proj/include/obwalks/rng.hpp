#pragma once

#include <cstdint>

namespace obwalks {

// SplitMix64. One 64-bit word of state, full period, passes BigCrush.
// Cheap enough to construct per sample, which is how reproducible parallel
// streams are made: see derive_stream below.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n), n > 0. Rejection keeps the draw exactly unbiased.
    std::uint64_t next_below(std::uint64_t n) {
        std::uint64_t cap = (0 - n) % n;
        std::uint64_t r;
        do {
            r = next();
        } while (r < cap);
        return (r - cap) % n;
    }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        next_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    std::uint64_t state_;
};

// Pure function of (master, tag, index): the stream a worker uses depends only
// on the sample index, never on scheduling or thread count. Tags separate the
// independent consumers inside one run (point sampling, model profiles, walks).
inline SplitMix64 derive_stream(std::uint64_t master, std::uint64_t tag,
                                std::uint64_t index) {
    SplitMix64 a(master ^ (0xBF58476D1CE4E5B9ull * (tag + 1)));
    std::uint64_t h = a.next();
    SplitMix64 b(h ^ (0x94D049BB133111EBull * (index + 1)));
    b.next();
    return b;
}

namespace rng_tag {
inline constexpr std::uint64_t nt_points = 1;
inline constexpr std::uint64_t model_profiles = 2;
inline constexpr std::uint64_t walks = 3;
inline constexpr std::uint64_t fk_walks = 4;
} // namespace rng_tag

} // namespace obwalks
