#include "support/solubility_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

namespace oracle {
namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

bool is_prime_trial(u64 p) {
    if (p < 2) return false;
    for (u64 d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

unsigned valuation_ll(long long c, u64 p) {
    unsigned v = 0;
    unsigned long long m = c < 0 ? -(unsigned long long)c : (unsigned long long)c;
    while (m % p == 0) {
        m /= p;
        ++v;
    }
    return v;
}

struct SquareTables {
    u64 M = 0;
    u64 p = 0;
    std::vector<bool> sq;      // residues of y^2
    std::vector<bool> sq_unit; // residues of y^2 with p not dividing y
};

// One build per modulus; the invariant sweeps reuse it across many c.
const SquareTables& tables_for(u64 p, u64 M) {
    static std::mutex mu;
    static std::map<u64, SquareTables> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(M);
    if (it != cache.end()) return it->second;
    SquareTables t;
    t.M = M;
    t.p = p;
    t.sq.assign(M, false);
    t.sq_unit.assign(M, false);
    for (u64 y = 0; y <= M / 2; ++y) {
        u64 r = static_cast<u64>(static_cast<u128>(y) * y % M);
        t.sq[r] = true;
        if (y % p != 0) t.sq_unit[r] = true;
    }
    return cache.emplace(M, std::move(t)).first->second;
}

unsigned resolve_threads(unsigned threads) {
    if (threads) return threads;
    unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

// Scans x0 in [0, M/2] for x1 with x0^2 + x1^2 = target (mod M).
// unit_needed additionally demands p not divide both x0 and x1.
bool representable(const SquareTables& t, u64 target, bool unit_needed, unsigned threads) {
    const u64 half = t.M / 2;
    const unsigned k = resolve_threads(threads);
    std::atomic<bool> found{false};
    auto scan = [&](u64 lo, u64 hi) {
        u64 done = 0;
        for (u64 x0 = lo; x0 <= hi; ++x0) {
            if ((++done & 0xFFF) == 0 && found.load(std::memory_order_relaxed)) return;
            u64 s = static_cast<u64>(static_cast<u128>(x0) * x0 % t.M);
            u64 rem = target >= s ? target - s : target + t.M - s;
            if (!unit_needed) {
                if (t.sq[rem]) {
                    found.store(true, std::memory_order_relaxed);
                    return;
                }
            } else {
                if (t.sq_unit[rem] || (x0 % t.p != 0 && t.sq[rem])) {
                    found.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        }
    };
    if (k == 1 || half < 1u << 16) {
        scan(0, half);
    } else {
        std::vector<std::thread> pool;
        u64 chunk = half / k + 1;
        for (unsigned w = 0; w < k; ++w) {
            u64 lo = w * chunk;
            u64 hi = std::min(half, lo + chunk - 1);
            if (lo > half) break;
            pool.emplace_back(scan, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return found.load();
}

} // namespace

bool conic_soluble_mod(long long c, u64 p, unsigned k, unsigned threads) {
    if (c == 0) throw std::invalid_argument("oracle: c must be nonzero");
    if (!is_prime_trial(p)) throw std::invalid_argument("oracle: p must be prime");
    u64 M = 1;
    for (unsigned i = 0; i < k; ++i) {
        if (M > (u64(1) << 62) / p) throw std::overflow_error("oracle: modulus too large");
        M *= p;
    }
    const SquareTables& t = tables_for(p, M);
    long long cr = c % static_cast<long long>(M);
    if (cr < 0) cr += static_cast<long long>(M);
    u64 cm = static_cast<u64>(cr);

    // x2 a unit: scaling by the inverse unit square reduces to x2 = 1,
    // and (x0, x1, 1) is primitive for free.
    if (representable(t, cm, false, threads)) return true;

    // p^j | x2 exactly: primitivity forces a unit among x0, x1. Unit-square
    // scaling again leaves one target per j; targets collapse once 2j >= k.
    std::set<u64> targets;
    for (unsigned j = 1; j <= (k + 1) / 2; ++j) {
        u128 scale = 1;
        for (unsigned i = 0; i < 2 * j && scale != 0; ++i) {
            scale = scale * p % M;
        }
        targets.insert(static_cast<u64>(static_cast<u128>(cm) * static_cast<u64>(scale) % M));
    }
    for (u64 tgt : targets)
        if (representable(t, tgt, true, threads)) return true;
    return false;
}

bool conic_soluble(long long c, u64 p, unsigned threads) {
    unsigned k = 2 * valuation_ll(c, p) + 3;
    return conic_soluble_mod(c, p, k, threads);
}

bool conic_soluble_brute(long long c, u64 p, unsigned k) {
    u64 M = 1;
    for (unsigned i = 0; i < k; ++i) M *= p;
    if (M > 400) {
        if (static_cast<u128>(M) * M * M > (u128(1) << 40))
            throw std::invalid_argument("oracle brute: modulus too large for O(M^3)");
    }
    long long cr = c % static_cast<long long>(M);
    if (cr < 0) cr += static_cast<long long>(M);
    u64 cm = static_cast<u64>(cr);
    for (u64 x2 = 0; x2 < M; ++x2) {
        u64 rhs = static_cast<u64>(static_cast<u128>(cm) * x2 % M * x2 % M);
        for (u64 x0 = 0; x0 < M; ++x0) {
            u64 s0 = static_cast<u64>(static_cast<u128>(x0) * x0 % M);
            for (u64 x1 = 0; x1 < M; ++x1) {
                if (x0 % p == 0 && x1 % p == 0 && x2 % p == 0) continue;
                u64 lhs = s0 + static_cast<u64>(static_cast<u128>(x1) * x1 % M);
                if (lhs >= M) lhs -= M;
                if (lhs == rhs) return true;
            }
        }
    }
    return false;
}

} // namespace oracle
