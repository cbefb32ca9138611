#pragma once

#include <span>
#include <string>
#include <vector>

#include "obwalks/arith.hpp"
#include "obwalks/points.hpp"

namespace obwalks {

// Primitive integer linear form a*s + b*t.
struct LinearForm {
    arith::i64 a = 0;
    arith::i64 b = 0;

    friend bool operator==(const LinearForm&, const LinearForm&) = default;
};

// The conic bundle x0^2 + x1^2 = F(s,t) x2^2 with F a product of d pairwise
// non-proportional primitive linear forms. Immutable after construction.
class ConicBundleFamily {
public:
    const std::vector<LinearForm>& forms() const { return forms_; }
    unsigned degree() const { return static_cast<unsigned>(forms_.size()); }
    double delta() const { return 0.5 * static_cast<double>(forms_.size()); }

    // 2 * prod_{i<j} (a_i b_j - a_j b_i); collects every prime of bad reduction.
    arith::i128 disc() const { return disc_; }

    // F(s,t) with overflow detection.
    arith::i128 evaluate(arith::i128 s, arith::i128 t) const;

private:
    friend ConicBundleFamily make_family(std::vector<LinearForm> forms);
    std::vector<LinearForm> forms_;
    arith::i128 disc_ = 0;
};

ConicBundleFamily make_family(std::vector<LinearForm> forms);

// Grammar: comma-separated linear forms, each a signed sum of monomials
// "k*s", "k*t" with optional "k*" (e.g. "s,t" or "s,t,s+t,s-t" or "2*s-3*t").
ConicBundleFamily parse_family(const std::string& text);
std::string format_family(const ConicBundleFamily& family);

// Reduced fraction, den > 0.
struct Rational {
    arith::i64 num = 0;
    arith::i64 den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

// Probability that the fibre over a uniform point of P^1(F_p) is non-split,
// by scanning all p+1 points: F != 0 gives a split fibre; F = 0 is split
// exactly when -1 is a square in F_p, with the p = 2 double line non-split.
Rational sigma_p(const ConicBundleFamily& family, arith::u64 p);

// sigma_p for every prime <= limit with prefix sums, sharing the prime table's
// index space. Holds references to the family copy inside and to the prime
// table, which must outlive the SigmaTable. Immutable after construction.
class SigmaTable {
public:
    const ConicBundleFamily& family() const { return family_; }
    arith::u64 limit() const { return limit_; }
    std::size_t count() const { return numer_.size(); }

    arith::u64 prime(std::size_t i) const { return primes_->primes()[i]; }
    arith::u32 sigma_numerator(std::size_t i) const { return numer_[i]; }
    double sigma(std::size_t i) const {
        return static_cast<double>(numer_[i]) / (static_cast<double>(prime(i)) + 1.0);
    }

    // Inclusive prefix sums over primes p_0..p_i:
    //   S    = sum sigma
    //   sS   = sum sigma * S      (S inclusive at that prime)
    //   sSS  = sum sigma * S^2
    //   var  = sum sigma * (1 - sigma)
    double S_at(std::size_t i) const { return S_[i]; }
    double sS_at(std::size_t i) const { return sS_[i]; }
    double sSS_at(std::size_t i) const { return sSS_[i]; }
    double var_at(std::size_t i) const { return var_[i]; }

    std::span<const double> S_prefix() const { return S_; }
    std::span<const double> sS_prefix() const { return sS_; }
    std::span<const double> sSS_prefix() const { return sSS_; }
    std::span<const double> var_prefix() const { return var_; }
    std::span<const arith::u64> covered_primes() const {
        return std::span(primes_->primes()).first(numer_.size());
    }

    // Largest index with prime <= T, or npos when T < 2.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index_le(double T) const;

    // S(T) = sum_{p <= T} sigma_p; T beyond the table is refused.
    double S(double T) const;
    double variance(double T) const;

private:
    friend SigmaTable build_sigma_table(const ConicBundleFamily&, arith::u64,
                                        const arith::PrimeTable&);
    ConicBundleFamily family_;
    const arith::PrimeTable* primes_ = nullptr;
    arith::u64 limit_ = 0;
    std::vector<arith::u32> numer_;
    std::vector<double> S_, sS_, sSS_, var_;
};

// Brute force up to the cutoff, closed form beyond (0 unless p = 3 mod 4,
// where the numerator is the number of distinct roots of F in P^1(F_p)).
// Both methods are compared on the overlap window; disagreement aborts via
// internal_error since it falsifies the closed form, not the input.
inline constexpr arith::u64 kSigmaBruteCutoff = 10'000;
inline constexpr arith::u64 kSigmaOverlapStart = 1'000;

SigmaTable build_sigma_table(const ConicBundleFamily& family, arith::u64 P_max,
                             const arith::PrimeTable& table);

// True iff the fibre over x has a Q_p-point: hilbert_symbol_neg_one(F(s,t), p) = +1.
// Degenerate fibres (F = 0) are refused; callers exclude them from statistics.
bool is_locally_soluble(const ConicBundleFamily& family, const RationalPoint& x,
                        arith::u64 p);

// Ascending primes dividing 2*F(s,t); a superset of the obstructing primes.
// Factors each form value separately so the magnitudes stay small.
std::vector<arith::u64> obstructing_prime_support(const ConicBundleFamily& family,
                                                  const RationalPoint& x,
                                                  const arith::PrimeTable& table);

// log prod_{p <= T, sigma_p < 1} (1 - sigma_p)^(-1). Primes with sigma_p = 1
// would make the product infinite and are skipped (only bad primes qualify).
double log_inverse_split_product(const SigmaTable& sigma, double T);

} // namespace obwalks
