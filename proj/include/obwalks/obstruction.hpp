#pragma once

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "obwalks/fibration.hpp"

namespace obwalks {

// Local solubility record of one fibre: the primes p where it has no
// Q_p-point. Hilbert reciprocity ties the count to the sign of c_value.
struct ObstructionProfile {
    RationalPoint point;
    arith::i128 c_value = 1;
    std::vector<arith::u64> obstructing; // ascending

    unsigned omega() const { return static_cast<unsigned>(obstructing.size()); }
};

// Factorizes 2*F(s,t) through the form values and tests each prime divisor.
// The parity invariant omega + [c < 0] even is asserted before returning;
// a violation means the symbol computation is wrong, hence internal_error.
ObstructionProfile profile(const ConicBundleFamily& family, const RationalPoint& x,
                           const arith::PrimeTable& table);

// #{p obstructing : p <= T}.
unsigned omega_truncated(const ObstructionProfile& prof, double T);

// j-th smallest obstructing prime with the sentinel conventions
// p_0 = -infinity and p_j = +infinity for j > omega.
inline constexpr arith::i64 kBelowAllPrimes = std::numeric_limits<arith::i64>::min();
inline constexpr arith::i64 kAboveAllPrimes = std::numeric_limits<arith::i64>::max();
arith::i64 p_j(const ObstructionProfile& prof, unsigned j);

// Excess-obstruction set restricted to p <= P and its sigma-mass:
//   value = sum of sigma_p over primes p <= P with omega(x, p) > S(p).
// Between consecutive obstructing primes omega(x, .) is constant, so the
// members form a prefix of each segment, found by binary search on the
// prefix-S table; index_runs lists the member ranges [begin, end) in the
// sigma table's prime index space.
struct ExcessMass {
    double value = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> index_runs;
};

ExcessMass c_hat(const ObstructionProfile& prof, const SigmaTable& sigma, double P);

// Same computation from a bare ascending prime list (synthetic profiles).
ExcessMass c_hat(std::span<const arith::u64> obstructing, const SigmaTable& sigma,
                 double P);

// Expands index_runs into the explicit ascending prime list.
std::vector<arith::u64> c_hat_primes(const ExcessMass& mass, const SigmaTable& sigma);

// {"point":"s/t","c":"<decimal>","obstructing":[...]}; c is a string because
// 128-bit values overflow JSON numbers.
std::string profile_to_json(const ObstructionProfile& prof);
ObstructionProfile profile_from_json(const std::string& text);

} // namespace obwalks
