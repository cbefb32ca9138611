#include "obwalks/arith.hpp"

#include <algorithm>
#include <cmath>

namespace obwalks::arith {

std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string out;
    while (v) {
        out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string to_string(i128 v) {
    if (v < 0) return "-" + to_string(abs128(v));
    return to_string(static_cast<u128>(v));
}

i128 parse_i128(const std::string& text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    if (i == text.size()) throw validation_error("parse_i128: empty integer in '" + text + "'");
    u128 acc = 0;
    constexpr u128 kMax = ~u128(0) >> 1; // 2^127 - 1
    for (; i < text.size(); ++i) {
        char ch = text[i];
        if (ch < '0' || ch > '9')
            throw validation_error("parse_i128: bad digit in '" + text + "'");
        u128 next = acc * 10 + static_cast<unsigned>(ch - '0');
        if (next < acc || next > kMax + (neg ? 1 : 0))
            throw capacity_error("parse_i128: value exceeds 128 bits");
        acc = next;
    }
    if (neg) return -static_cast<i128>(acc - 1) - 1;
    return static_cast<i128>(acc);
}

PrimeTable::PrimeTable(u64 limit) : limit_(limit) {
    if (limit < 2) throw validation_error("PrimeTable: limit must be >= 2");
    if (limit > kLimitCeiling)
        throw capacity_error("PrimeTable: limit exceeds memory ceiling, lower the sieve bound");

    odd_composite_.assign((limit + 1) / 2 + 1, false);
    odd_composite_[0] = true; // n = 1
    for (u64 p = 3; p * p <= limit; p += 2) {
        if (odd_composite_[p >> 1]) continue;
        for (u64 q = p * p; q <= limit; q += 2 * p) odd_composite_[q >> 1] = true;
    }
    primes_.push_back(2);
    for (u64 n = 3; n <= limit; n += 2)
        if (!odd_composite_[n >> 1]) primes_.push_back(n);

    spf_limit_ = std::min(limit, kSpfCeiling);
    odd_spf_.assign(spf_limit_ / 2 + 1, 0);
    for (u64 p = 3; p * p <= spf_limit_; p += 2) {
        if (odd_spf_[p >> 1] != 0) continue;
        for (u64 q = p * p; q <= spf_limit_; q += 2 * p)
            if (odd_spf_[q >> 1] == 0) odd_spf_[q >> 1] = static_cast<u32>(p);
    }
}

bool PrimeTable::is_prime(u64 n) const {
    if (n > limit_) throw validation_error("PrimeTable::is_prime: n exceeds sieve limit");
    if (n < 2) return false;
    if (n == 2) return true;
    if ((n & 1) == 0) return false;
    return !odd_composite_[n >> 1];
}

u64 PrimeTable::smallest_factor(u64 n) const {
    if (n < 2 || n > spf_limit_)
        throw validation_error("PrimeTable::smallest_factor: n outside [2, spf_limit]");
    if ((n & 1) == 0) return 2;
    u32 f = odd_spf_[n >> 1];
    return f ? f : n;
}

std::size_t PrimeTable::index_of_prime_le(double x) const {
    if (!(x >= 2)) return npos;
    u64 xi = x >= static_cast<double>(limit_) ? limit_ : static_cast<u64>(x);
    auto it = std::upper_bound(primes_.begin(), primes_.end(), xi);
    if (it == primes_.begin()) return npos;
    return static_cast<std::size_t>(it - primes_.begin()) - 1;
}

PrimeTable sieve_primes(u64 limit) { return PrimeTable(limit); }

i128 Factorization::reconstruct() const {
    i128 acc = sign;
    for (auto [p, e] : factors)
        for (unsigned k = 0; k < e; ++k) acc *= static_cast<i128>(p);
    return acc;
}

namespace {

u64 mulmod64(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 powmod64(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod64(r, a, m);
        a = mulmod64(a, a, m);
        e >>= 1;
    }
    return r;
}

// Works for any modulus below 2^127; falls back to shift-add above 64 bits.
u128 mulmod128(u128 a, u128 b, u128 m) {
    a %= m;
    b %= m;
    if ((m >> 64) == 0) return static_cast<u128>(a) * b % m;
    u128 r = 0;
    while (b) {
        if (b & 1) {
            r += a;
            if (r >= m) r -= m;
        }
        a <<= 1;
        if (a >= m) a -= m;
        b >>= 1;
    }
    return r;
}

u128 powmod128(u128 a, u128 e, u128 m) {
    u128 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod128(r, a, m);
        a = mulmod128(a, a, m);
        e >>= 1;
    }
    return r;
}

constexpr u64 kMrBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

// Strong probable prime to every base in kMrBases. Deterministic below 2^64;
// above that (128-bit cofactors) the same test is a probable-prime check only.
bool is_probable_prime_128(u128 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u128 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 base : kMrBases) {
        u128 x = powmod128(base, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod128(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

u128 gcd128(u128 a, u128 b) {
    while (b) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Brent-cycle Pollard rho with polynomial x^2 + c. Returns a nontrivial
// divisor or 0 when the shared budget runs out.
u128 pollard_brent(u128 n, u128 c, u64& budget) {
    if ((n & 1) == 0) return 2;
    u128 y = 2, r = 1, q = 1, g = 1, x = 0, ys = 0;
    const u64 batch = 128;
    while (g == 1) {
        x = y;
        for (u128 i = 0; i < r; ++i) y = (mulmod128(y, y, n) + c) % n;
        u128 k = 0;
        while (k < r && g == 1) {
            ys = y;
            u128 span = std::min<u128>(batch, r - k);
            if (budget < span) return 0;
            budget -= static_cast<u64>(span);
            for (u128 i = 0; i < span; ++i) {
                y = (mulmod128(y, y, n) + c) % n;
                u128 diff = x > y ? x - y : y - x;
                q = mulmod128(q, diff == 0 ? 1 : diff, n);
            }
            g = gcd128(q, n);
            k += span;
        }
        r <<= 1;
    }
    if (g == n) {
        g = 1;
        while (g == 1) {
            if (budget == 0) return 0;
            --budget;
            ys = (mulmod128(ys, ys, n) + c) % n;
            u128 diff = x > ys ? x - ys : ys - x;
            g = gcd128(diff == 0 ? 1 : diff, n);
        }
    }
    return g == n ? 0 : g;
}

void split_cofactor(u128 m, std::vector<std::pair<u64, unsigned>>& out, u64& budget) {
    if (m == 1) return;
    if (is_probable_prime_128(m)) {
        if ((m >> 64) != 0)
            throw capacity_error("factorize: prime factor exceeds 64 bits");
        out.emplace_back(static_cast<u64>(m), 1u);
        return;
    }
    for (u128 c : {u128(1), u128(3)}) {
        u128 d = pollard_brent(m, c, budget);
        if (d != 0 && d != m) {
            split_cofactor(d, out, budget);
            split_cofactor(m / d, out, budget);
            return;
        }
    }
    throw capacity_error("factorize: Pollard iteration budget exhausted, factor a smaller value");
}

} // namespace

bool miller_rabin_is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 base : kMrBases) {
        u64 x = powmod64(base, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod64(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

int legendre_symbol(i64 a, u64 p) {
    if (p == 2 || !miller_rabin_is_prime(p))
        throw validation_error("legendre_symbol: p must be an odd prime");
    i64 r = a % static_cast<i64>(p);
    if (r < 0) r += static_cast<i64>(p);
    if (r == 0) return 0;
    u64 e = powmod64(static_cast<u64>(r), (p - 1) / 2, p);
    return e == 1 ? 1 : -1;
}

unsigned valuation(i128 n, u64 p) {
    if (n == 0) throw validation_error("valuation: n must be nonzero");
    if (p < 2) throw validation_error("valuation: p must be >= 2");
    u128 m = abs128(n);
    unsigned v = 0;
    while (m % p == 0) {
        m /= p;
        ++v;
    }
    return v;
}

int hilbert_symbol_neg_one(i128 c, u64 p) {
    if (c == 0) throw validation_error("hilbert_symbol_neg_one: c must be nonzero");
    if (p == 2) {
        i128 v = c;
        while ((v & 1) == 0) v /= 2;
        int mod4 = static_cast<int>(((v % 4) + 4) % 4);
        return mod4 == 3 ? -1 : 1;
    }
    if ((p & 1) == 0 || !miller_rabin_is_prime(p))
        throw validation_error("hilbert_symbol_neg_one: p must be prime");
    if (p % 4 == 1) return 1;
    return (valuation(c, p) & 1) ? -1 : 1;
}

Factorization factorize(i128 n, const PrimeTable& table) {
    if (n == 0) throw validation_error("factorize: n must be nonzero");
    Factorization out;
    out.value = n;
    out.sign = n < 0 ? -1 : 1;
    u128 m = abs128(n);
    u64 budget = 10'000'000;

    std::vector<std::pair<u64, unsigned>> raw;
    bool covered = false;
    for (u64 p : table.primes()) {
        if (m <= table.spf_limit()) {
            // spf chain finishes small values in O(log m)
            u64 s = static_cast<u64>(m);
            while (s > 1) {
                u64 f = table.smallest_factor(s);
                unsigned e = 0;
                while (s % f == 0) {
                    s /= f;
                    ++e;
                }
                raw.emplace_back(f, e);
            }
            m = 1;
            covered = true;
            break;
        }
        if (static_cast<u128>(p) * p > m) {
            covered = true;
            break;
        }
        if (m % p == 0) {
            unsigned e = 0;
            while (m % p == 0) {
                m /= p;
                ++e;
            }
            raw.emplace_back(p, e);
        }
    }
    if (m > 1) {
        if (covered) {
            if ((m >> 64) != 0) throw capacity_error("factorize: prime factor exceeds 64 bits");
            raw.emplace_back(static_cast<u64>(m), 1u);
        } else {
            split_cofactor(m, raw, budget);
        }
    }

    std::sort(raw.begin(), raw.end());
    for (auto [p, e] : raw) {
        if (!out.factors.empty() && out.factors.back().first == p)
            out.factors.back().second += e;
        else
            out.factors.emplace_back(p, e);
    }
    return out;
}

double mertens_sum(double B, const PrimeTable& table) {
    if (!(B >= 2)) throw validation_error("mertens_sum: B must be >= 2");
    if (B > static_cast<double>(table.limit()))
        throw capacity_error("mertens_sum: B exceeds the sieve limit, enlarge the table");
    long double acc = 0.0L;
    for (u64 p : table.primes()) {
        if (static_cast<double>(p) > B) break;
        acc += 1.0L / static_cast<long double>(p);
    }
    return static_cast<double>(acc);
}

} // namespace obwalks::arith
