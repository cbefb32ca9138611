#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "obwalks/errors.hpp"

namespace obwalks::arith {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using i128 = __int128;
using u128 = unsigned __int128;

std::string to_string(i128 v);
std::string to_string(u128 v);
i128 parse_i128(const std::string& text); // decimal with optional sign

inline u128 abs128(i128 v) {
    return v < 0 ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
}

// All primes <= limit, a primality bitmap, and least-prime-factor lookups up
// to spf_limit(). Immutable after construction, shareable across threads.
class PrimeTable {
public:
    static constexpr u64 kLimitCeiling = 200'000'000; // memory ceiling
    static constexpr u64 kSpfCeiling = u64(1) << 24;

    explicit PrimeTable(u64 limit);

    u64 limit() const { return limit_; }
    u64 spf_limit() const { return spf_limit_; }
    const std::vector<u64>& primes() const { return primes_; }
    std::size_t count() const { return primes_.size(); }

    bool is_prime(u64 n) const; // requires n <= limit()

    // Least prime factor of n, requires 2 <= n <= spf_limit().
    u64 smallest_factor(u64 n) const;

    // Index of the largest prime <= x, or npos when x < 2.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index_of_prime_le(double x) const;

private:
    u64 limit_;
    u64 spf_limit_;
    std::vector<u64> primes_;
    std::vector<bool> odd_composite_; // bit i = (2i+1) composite
    std::vector<u32> odd_spf_;        // least factor of 2i+1, 0 = prime or 1
};

PrimeTable sieve_primes(u64 limit);

struct Factorization {
    i128 value = 0; // nonzero input
    int sign = 1;
    std::vector<std::pair<u64, unsigned>> factors; // ascending primes

    i128 reconstruct() const; // sign * prod p^e
};

// Deterministic Miller-Rabin, exact for all 64-bit n.
bool miller_rabin_is_prime(u64 n);

// Legendre symbol (a|p) for an odd prime p, via Euler's criterion.
int legendre_symbol(i64 a, u64 p);

// Hilbert symbol (-1, c)_p over Q_p, c != 0.
// Odd p: -1 iff p = 3 (mod 4) and v_p(c) is odd.
// p = 2: -1 iff the odd part of c (sign included) is 3 (mod 4).
int hilbert_symbol_neg_one(i128 c, u64 p);

// v_p(n) for nonzero n.
unsigned valuation(i128 n, u64 p);

// Complete factorization of n != 0. Trial division by table primes, then
// Pollard-Brent with a fixed iteration budget for any surviving cofactor.
Factorization factorize(i128 n, const PrimeTable& table);

// Sum of 1/p over primes p <= B, summed in ascending order.
double mertens_sum(double B, const PrimeTable& table);

} // namespace obwalks::arith
