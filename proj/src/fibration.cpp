#include "obwalks/fibration.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "obwalks/errors.hpp"

namespace obwalks {

using arith::i128;
using arith::i64;
using arith::u128;
using arith::u32;
using arith::u64;

namespace {

i128 checked_mul(i128 x, i128 y, const char* what) {
    i128 r;
    if (__builtin_mul_overflow(x, y, &r))
        throw capacity_error(std::string(what) + " exceeds 128 bits");
    return r;
}

i128 checked_add(i128 x, i128 y, const char* what) {
    i128 r;
    if (__builtin_add_overflow(x, y, &r))
        throw capacity_error(std::string(what) + " exceeds 128 bits");
    return r;
}

u64 mod_p(i64 v, u64 p) {
    i64 m = v % static_cast<i64>(p);
    return static_cast<u64>(m < 0 ? m + static_cast<i64>(p) : m);
}

// Zeros of F on P^1(F_p); these are the non-split fibres when p = 2 or
// p = 3 (mod 4), and split fibres otherwise.
u64 zero_fibre_count(const ConicBundleFamily& family, u64 p) {
    const auto& forms = family.forms();
    std::vector<u64> am(forms.size()), bm(forms.size());
    for (std::size_t i = 0; i < forms.size(); ++i) {
        am[i] = mod_p(forms[i].a, p);
        bm[i] = mod_p(forms[i].b, p);
    }
    u64 zeros = 0;
    for (u64 t = 0; t < p; ++t) { // (1 : t)
        u64 prod = 1;
        for (std::size_t i = 0; i < forms.size() && prod; ++i)
            prod = prod * ((am[i] + bm[i] * t) % p) % p;
        zeros += prod == 0;
    }
    u64 prod = 1; // (0 : 1)
    for (std::size_t i = 0; i < forms.size() && prod; ++i) prod = prod * bm[i] % p;
    zeros += prod == 0;
    return zeros;
}

struct Dsu {
    std::vector<unsigned> parent;
    explicit Dsu(unsigned n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    unsigned find(unsigned x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(unsigned x, unsigned y) { parent[find(x)] = find(y); }
};

} // namespace

i128 ConicBundleFamily::evaluate(i128 s, i128 t) const {
    i128 val = 1;
    for (const auto& f : forms_) {
        i128 term = checked_add(checked_mul(f.a, s, "form value"),
                                checked_mul(f.b, t, "form value"), "form value");
        val = checked_mul(val, term, "family evaluation");
    }
    return val;
}

ConicBundleFamily make_family(std::vector<LinearForm> forms) {
    if (forms.empty()) throw validation_error("make_family: need at least one linear form");
    for (const auto& f : forms) {
        if (f.a == 0 && f.b == 0) throw validation_error("make_family: zero form");
        if (std::gcd(f.a < 0 ? -f.a : f.a, f.b < 0 ? -f.b : f.b) != 1)
            throw validation_error("make_family: non-primitive form " +
                                   std::to_string(f.a) + "*s+" + std::to_string(f.b) + "*t");
    }
    i128 disc = 2;
    for (std::size_t i = 0; i < forms.size(); ++i) {
        for (std::size_t j = i + 1; j < forms.size(); ++j) {
            i128 cross = static_cast<i128>(forms[i].a) * forms[j].b -
                         static_cast<i128>(forms[j].a) * forms[i].b;
            if (cross == 0)
                throw validation_error("make_family: proportional forms at positions " +
                                       std::to_string(i) + " and " + std::to_string(j));
            disc = checked_mul(disc, cross, "family discriminant");
        }
    }
    ConicBundleFamily fam;
    fam.forms_ = std::move(forms);
    fam.disc_ = disc;
    return fam;
}

namespace {

LinearForm parse_form(const std::string& term) {
    LinearForm f{0, 0};
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < term.size() && std::isspace(static_cast<unsigned char>(term[i]))) ++i;
    };
    auto fail = [&](const std::string& why) {
        throw validation_error("parse_family: " + why + " in form '" + term + "'");
    };
    bool any = false;
    for (skip_ws(); i < term.size(); skip_ws()) {
        i64 sign = 1;
        if (term[i] == '+' || term[i] == '-') {
            sign = term[i] == '-' ? -1 : 1;
            ++i;
            skip_ws();
        } else if (any) {
            fail("expected '+' or '-' between monomials");
        }
        i64 coeff = 1;
        bool have_coeff = false;
        if (i < term.size() && std::isdigit(static_cast<unsigned char>(term[i]))) {
            coeff = 0;
            have_coeff = true;
            for (; i < term.size() && std::isdigit(static_cast<unsigned char>(term[i])); ++i) {
                i64 digit = term[i] - '0';
                if (__builtin_mul_overflow(coeff, i64{10}, &coeff) ||
                    __builtin_add_overflow(coeff, digit, &coeff))
                    fail("coefficient overflows 64 bits");
            }
            skip_ws();
            if (i < term.size() && term[i] == '*') {
                ++i;
                skip_ws();
            }
        }
        if (i >= term.size() || (term[i] != 's' && term[i] != 't')) {
            if (have_coeff) fail("constant term, every monomial needs 's' or 't'");
            fail("expected a monomial in 's' or 't'");
        }
        i64& slot = term[i] == 's' ? f.a : f.b;
        ++i;
        i64 add;
        if (__builtin_mul_overflow(sign, coeff, &add) ||
            __builtin_add_overflow(slot, add, &slot))
            fail("coefficient overflows 64 bits");
        any = true;
    }
    if (!any) fail("empty form");
    return f;
}

} // namespace

ConicBundleFamily parse_family(const std::string& text) {
    std::vector<LinearForm> forms;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::size_t end = comma == std::string::npos ? text.size() : comma;
        forms.push_back(parse_form(text.substr(start, end - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return make_family(std::move(forms));
}

std::string format_family(const ConicBundleFamily& family) {
    std::string out;
    for (const auto& f : family.forms()) {
        if (!out.empty()) out += ",";
        std::string term;
        if (f.a != 0) {
            if (f.a == -1)
                term += "-";
            else if (f.a != 1)
                term += std::to_string(f.a) + "*";
            term += "s";
        }
        if (f.b != 0) {
            if (!term.empty() && f.b > 0) term += "+";
            if (f.b == -1)
                term += "-";
            else if (f.b != 1)
                term += (f.b < 0 ? "-" : "") + std::to_string(f.b < 0 ? -f.b : f.b) + "*";
            term += "t";
        }
        out += term;
    }
    return out;
}

Rational sigma_p(const ConicBundleFamily& family, u64 p) {
    if (!arith::miller_rabin_is_prime(p))
        throw validation_error("sigma_p: " + std::to_string(p) + " is not prime");
    u64 numer = (p == 2 || p % 4 == 3) ? zero_fibre_count(family, p) : 0;
    u64 denom = p + 1;
    u64 g = std::gcd(numer, denom);
    return Rational{static_cast<i64>(numer / g), static_cast<i64>(denom / g)};
}

std::size_t SigmaTable::index_le(double T) const {
    if (T < 2) return npos;
    std::size_t i = primes_->index_of_prime_le(std::min(T, static_cast<double>(limit_)));
    if (i == arith::PrimeTable::npos) return npos;
    return std::min(i, numer_.size() - 1);
}

double SigmaTable::S(double T) const {
    if (T > static_cast<double>(limit_))
        throw validation_error("SigmaTable::S: T exceeds the table limit");
    std::size_t i = index_le(T);
    return i == npos ? 0.0 : S_[i];
}

double SigmaTable::variance(double T) const {
    if (T > static_cast<double>(limit_))
        throw validation_error("SigmaTable::variance: T exceeds the table limit");
    std::size_t i = index_le(T);
    return i == npos ? 0.0 : var_[i];
}

SigmaTable build_sigma_table(const ConicBundleFamily& family, u64 P_max,
                             const arith::PrimeTable& table) {
    if (P_max < 2) throw validation_error("build_sigma_table: P_max must be >= 2");
    if (P_max > table.limit())
        throw validation_error("build_sigma_table: P_max exceeds the prime table");

    const unsigned d = family.degree();
    // Primes where two forms share a root, from the pairwise cross products.
    std::map<u64, std::vector<std::pair<unsigned, unsigned>>> collisions;
    const auto& forms = family.forms();
    for (unsigned i = 0; i < d; ++i) {
        for (unsigned j = i + 1; j < d; ++j) {
            i128 cross = static_cast<i128>(forms[i].a) * forms[j].b -
                         static_cast<i128>(forms[j].a) * forms[i].b;
            for (const auto& [q, e] : arith::factorize(cross, table).factors)
                collisions[q].push_back({i, j});
        }
    }
    auto closed_numer = [&](u64 p) -> u64 {
        if (p % 4 != 3) return 0;
        auto it = collisions.find(p);
        if (it == collisions.end()) return d;
        Dsu dsu(d);
        for (auto [i, j] : it->second) dsu.unite(i, j);
        u64 roots = 0;
        for (unsigned i = 0; i < d; ++i) roots += dsu.find(i) == i;
        return roots;
    };

    SigmaTable st;
    st.family_ = family;
    st.primes_ = &table;
    st.limit_ = P_max;
    std::size_t n = table.index_of_prime_le(static_cast<double>(P_max)) + 1;
    st.numer_.resize(n);
    st.S_.resize(n);
    st.sS_.resize(n);
    st.sSS_.resize(n);
    st.var_.resize(n);

    long double accS = 0, accsS = 0, accsSS = 0, accV = 0;
    for (std::size_t i = 0; i < n; ++i) {
        u64 p = table.primes()[i];
        u64 numer;
        if (p <= kSigmaBruteCutoff) {
            numer = (p == 2 || p % 4 == 3) ? zero_fibre_count(family, p) : 0;
            if (p >= kSigmaOverlapStart && p > 2 && closed_numer(p) != numer)
                throw internal_error("build_sigma_table: closed form disagrees with brute "
                                     "force at p = " + std::to_string(p));
        } else {
            numer = closed_numer(p);
        }
        st.numer_[i] = static_cast<u32>(numer);
        long double sigma = static_cast<long double>(numer) / (static_cast<long double>(p) + 1);
        accS += sigma;
        accsS += sigma * accS;
        accsSS += sigma * accS * accS;
        accV += sigma * (1 - sigma);
        st.S_[i] = static_cast<double>(accS);
        st.sS_[i] = static_cast<double>(accsS);
        st.sSS_[i] = static_cast<double>(accsSS);
        st.var_[i] = static_cast<double>(accV);
    }
    return st;
}

bool is_locally_soluble(const ConicBundleFamily& family, const RationalPoint& x, u64 p) {
    i128 c = family.evaluate(x.s, x.t);
    if (c == 0)
        throw degenerate_fibre_error("is_locally_soluble: F(s,t) = 0 at " + format_point(x));
    return arith::hilbert_symbol_neg_one(c, p) == 1;
}

std::vector<u64> obstructing_prime_support(const ConicBundleFamily& family,
                                           const RationalPoint& x,
                                           const arith::PrimeTable& table) {
    std::set<u64> ps{2};
    for (const auto& f : family.forms()) {
        i128 v = checked_add(checked_mul(f.a, x.s, "form value"),
                             checked_mul(f.b, x.t, "form value"), "form value");
        if (v == 0)
            throw degenerate_fibre_error("obstructing_prime_support: F(s,t) = 0 at " +
                                         format_point(x));
        for (const auto& [q, e] : arith::factorize(v, table).factors) ps.insert(q);
    }
    return std::vector<u64>(ps.begin(), ps.end());
}

double log_inverse_split_product(const SigmaTable& sigma, double T) {
    if (T > static_cast<double>(sigma.limit()))
        throw validation_error("log_inverse_split_product: T exceeds the table limit");
    std::size_t last = sigma.index_le(T);
    if (last == SigmaTable::npos) return 0.0;
    long double acc = 0;
    for (std::size_t i = 0; i <= last; ++i) {
        u64 p = sigma.prime(i);
        u64 numer = sigma.sigma_numerator(i);
        if (numer == p + 1) continue;
        acc -= std::log1p(-static_cast<long double>(numer) / (static_cast<long double>(p) + 1));
    }
    return static_cast<double>(acc);
}

} // namespace obwalks
