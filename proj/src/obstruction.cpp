#include "obwalks/obstruction.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "obwalks/errors.hpp"

namespace obwalks {

using arith::i128;
using arith::i64;
using arith::u64;

ObstructionProfile profile(const ConicBundleFamily& family, const RationalPoint& x,
                           const arith::PrimeTable& table) {
    ObstructionProfile prof;
    prof.point = x;
    prof.c_value = family.evaluate(x.s, x.t);
    if (prof.c_value == 0)
        throw degenerate_fibre_error("profile: F(s,t) = 0 at " + format_point(x));
    for (u64 p : obstructing_prime_support(family, x, table))
        if (arith::hilbert_symbol_neg_one(prof.c_value, p) != 1)
            prof.obstructing.push_back(p);
    unsigned parity = (prof.omega() + (prof.c_value < 0 ? 1 : 0)) % 2;
    if (parity != 0)
        throw internal_error("profile: reciprocity parity violated at " + format_point(x) +
                             ", the local symbols are inconsistent");
    return prof;
}

unsigned omega_truncated(const ObstructionProfile& prof, double T) {
    auto it = std::upper_bound(prof.obstructing.begin(), prof.obstructing.end(), T,
                               [](double t, u64 p) { return t < static_cast<double>(p); });
    return static_cast<unsigned>(it - prof.obstructing.begin());
}

i64 p_j(const ObstructionProfile& prof, unsigned j) {
    if (j == 0) return kBelowAllPrimes;
    if (j > prof.omega()) return kAboveAllPrimes;
    return static_cast<i64>(prof.obstructing[j - 1]);
}

ExcessMass c_hat(const ObstructionProfile& prof, const SigmaTable& sigma, double P) {
    return c_hat(std::span<const u64>(prof.obstructing), sigma, P);
}

ExcessMass c_hat(std::span<const u64> obs, const SigmaTable& sigma, double P) {
    if (P > static_cast<double>(sigma.limit()))
        throw validation_error("c_hat: P exceeds the sigma table limit");
    ExcessMass out;
    if (P < 2) return out;
    const auto S = sigma.S_prefix();
    const std::size_t plast = sigma.index_le(P);
    for (std::size_t k = 1; k <= obs.size(); ++k) {
        double rk = static_cast<double>(obs[k - 1]);
        if (rk > P) break;
        std::size_t ib = sigma.index_le(rk);
        std::size_t ie = plast; // segment end: last prime < r_{k+1}, capped at P
        if (k < obs.size()) {
            double next = std::nextafter(static_cast<double>(obs[k]), 0.0);
            ie = std::min(ie, sigma.index_le(next));
        }
        // members are the prefix of [ib, ie] where S < k
        auto first_ge = std::lower_bound(S.begin() + static_cast<std::ptrdiff_t>(ib),
                                         S.begin() + static_cast<std::ptrdiff_t>(ie) + 1,
                                         static_cast<double>(k));
        std::size_t m = static_cast<std::size_t>(first_ge - S.begin());
        if (m == ib) continue;
        out.value += S[m - 1] - (ib == 0 ? 0.0 : S[ib - 1]);
        out.index_runs.push_back({ib, m});
    }
    return out;
}

std::vector<u64> c_hat_primes(const ExcessMass& mass, const SigmaTable& sigma) {
    std::vector<u64> out;
    for (auto [b, e] : mass.index_runs)
        for (std::size_t i = b; i < e; ++i) out.push_back(sigma.prime(i));
    return out;
}

std::string profile_to_json(const ObstructionProfile& prof) {
    nlohmann::ordered_json j;
    j["point"] = format_point(prof.point);
    j["c"] = arith::to_string(prof.c_value);
    j["obstructing"] = prof.obstructing;
    return j.dump();
}

ObstructionProfile profile_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("profile_from_json: ") + e.what());
    }
    if (!j.contains("point") || !j.contains("c") || !j.contains("obstructing"))
        throw validation_error("profile_from_json: missing point/c/obstructing");
    ObstructionProfile prof;
    prof.point = parse_point(j["point"].get<std::string>());
    prof.c_value = arith::parse_i128(j["c"].get<std::string>());
    prof.obstructing = j["obstructing"].get<std::vector<u64>>();
    if (!std::is_sorted(prof.obstructing.begin(), prof.obstructing.end()))
        throw validation_error("profile_from_json: obstructing primes must ascend");
    return prof;
}

} // namespace obwalks
