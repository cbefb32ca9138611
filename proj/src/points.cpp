#include "obwalks/points.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "obwalks/errors.hpp"

namespace obwalks {

using arith::i128;
using arith::u128;
using arith::u64;

namespace {

u128 gcd128(u128 a, u128 b) {
    while (b) {
        u128 r = a % b;
        a = b;
        b = r;
    }
    return a;
}

u128 abs_u128(i128 v) { return v < 0 ? -static_cast<u128>(v) : static_cast<u128>(v); }

} // namespace

i128 RationalPoint::height() const {
    u128 h = std::max(abs_u128(s), abs_u128(t));
    return static_cast<i128>(h);
}

RationalPoint make_point(i128 s, i128 t) {
    if (s == 0 && t == 0) throw validation_error("make_point: (0, 0) is not projective");
    u128 g = gcd128(abs_u128(s), abs_u128(t));
    s /= static_cast<i128>(g);
    t /= static_cast<i128>(g);
    i128 lead = s != 0 ? s : t;
    if (lead < 0) {
        s = -s;
        t = -t;
    }
    return RationalPoint{s, t};
}

std::string format_point(const RationalPoint& x) {
    return arith::to_string(x.s) + "/" + arith::to_string(x.t);
}

RationalPoint parse_point(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos)
        throw validation_error("parse_point: expected 's/t' in '" + text + "'");
    return make_point(arith::parse_i128(text.substr(0, slash)),
                      arith::parse_i128(text.substr(slash + 1)));
}

std::vector<RationalPoint> enumerate_points(u64 B, u64 max_B) {
    if (B < 1) throw validation_error("enumerate_points: empty height range, B must be >= 1");
    if (B > max_B)
        throw capacity_error("enumerate_points: B exceeds the enumeration ceiling, "
                             "use sample_point for large heights");
    // Canonical representatives are (0, 1) plus every s >= 1; t = 0 forces s = 1.
    std::vector<RationalPoint> out;
    out.reserve(static_cast<std::size_t>(1.22 * static_cast<double>(B) * static_cast<double>(B)) + 8);
    out.push_back(RationalPoint{0, 1});
    for (u64 s = 1; s <= B; ++s) {
        for (u64 a = s == 1 ? 0 : 1; a <= B; ++a) {
            if (std::gcd(s, a) != 1) continue;
            out.push_back(RationalPoint{static_cast<i128>(s), static_cast<i128>(a)});
            if (a != 0) out.push_back(RationalPoint{static_cast<i128>(s), -static_cast<i128>(a)});
        }
    }
    std::sort(out.begin(), out.end(), [](const RationalPoint& x, const RationalPoint& y) {
        return std::tuple(x.height(), x.s, x.t) < std::tuple(y.height(), y.s, y.t);
    });
    return out;
}

RationalPoint sample_point(u64 B, SplitMix64& rng) {
    if (B < 1) throw validation_error("sample_point: B must be >= 1");
    const u64 side = 2 * B + 1;
    for (;;) {
        arith::i64 s = static_cast<arith::i64>(rng.next_below(side)) - static_cast<arith::i64>(B);
        arith::i64 t = static_cast<arith::i64>(rng.next_below(side)) - static_cast<arith::i64>(B);
        if (s == 0 && t == 0) continue;
        if (std::gcd(s < 0 ? -s : s, t < 0 ? -t : t) != 1) continue;
        return make_point(s, t);
    }
}

RationalPoint klapaklapa_point(unsigned N, const arith::PrimeTable& table) {
    if (N < 1) throw validation_error("klapaklapa_point: N must be >= 1");
    i128 prod = 1;
    unsigned taken = 0;
    for (u64 p : table.primes()) {
        if (p % 4 != 3) continue;
        i128 next;
        if (__builtin_mul_overflow(prod, static_cast<i128>(p), &next))
            throw capacity_error("klapaklapa_point: prime product exceeds 128 bits");
        prod = next;
        if (++taken == N) return make_point(1, prod);
    }
    throw validation_error("klapaklapa_point: prime table holds fewer than N primes = 3 (mod 4)");
}

} // namespace obwalks
