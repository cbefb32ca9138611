#pragma once

#include <string>
#include <vector>

#include "obwalks/arith.hpp"
#include "obwalks/rng.hpp"

namespace obwalks {

// Projective point (s : t) on P^1(Q), reduced and sign-normalized so each
// point has exactly one representative: gcd(s,t) = 1, first nonzero
// coordinate positive.
struct RationalPoint {
    arith::i128 s = 0;
    arith::i128 t = 1;

    arith::i128 height() const;

    friend bool operator==(const RationalPoint&, const RationalPoint&) = default;
};

// Canonical representative of (s : t). Throws validation_error on (0, 0).
RationalPoint make_point(arith::i128 s, arith::i128 t);

// "s/t" with decimal coordinates.
std::string format_point(const RationalPoint& x);
RationalPoint parse_point(const std::string& text);

inline constexpr arith::u64 kEnumerationCeiling = 10'000;

// All points of height <= B, ordered by (height, s, t).
// B above the ceiling is refused; use sample_point instead.
std::vector<RationalPoint> enumerate_points(arith::u64 B,
                                            arith::u64 max_B = kEnumerationCeiling);

// Uniform draw from the height-<= B points. Rejection from the integer box
// [-B, B]^2: every point has exactly two primitive representatives there, so
// acceptance is unbiased (about 1.65 draws per sample).
RationalPoint sample_point(arith::u64 B, SplitMix64& rng);

// (1 : q_1 q_2 ... q_N) over the ascending primes q_i = 3 (mod 4).
// The product overflowing signed 128 bits raises capacity_error (N >= 22).
RationalPoint klapaklapa_point(unsigned N, const arith::PrimeTable& table);

} // namespace obwalks
