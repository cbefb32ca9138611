#include "doctest.h"

#include <cmath>
#include <sstream>

#include "obwalks/paths.hpp"

using namespace obwalks;
using namespace obwalks::arith;
using doctest::Approx;

namespace {

const PrimeTable& table_1e5() {
    static const PrimeTable t(100'000);
    return t;
}

const ConicBundleFamily& family_st() {
    static const ConicBundleFamily f = parse_family("s,t");
    return f;
}

const ConicBundleFamily& family_quartic() {
    static const ConicBundleFamily f = parse_family("s,t,s+t,s-t");
    return f;
}

const SigmaTable& sigma_st() {
    static const SigmaTable s = build_sigma_table(family_st(), 100'000, table_1e5());
    return s;
}

const SigmaTable& sigma_quartic() {
    static const SigmaTable s = build_sigma_table(family_quartic(), 100'000, table_1e5());
    return s;
}

double lam_of(const ConicBundleFamily& fam, double B) {
    return fam.delta() * std::log(std::log(B));
}

unsigned omega_le(const std::vector<u64>& obs, double T) {
    unsigned n = 0;
    for (u64 p : obs)
        if (static_cast<double>(p) <= T) ++n;
    return n;
}

// piecewise linear read-off of a sampled path
double eval_path(const PathSample& path, double t) {
    if (t <= path.grid.front()) return path.values.front();
    if (t >= path.grid.back()) return path.values.back();
    auto it = std::upper_bound(path.grid.begin(), path.grid.end(), t);
    std::size_t i = static_cast<std::size_t>(it - path.grid.begin());
    double w = (t - path.grid[i - 1]) / (path.grid[i] - path.grid[i - 1]);
    return path.values[i - 1] + w * (path.values[i] - path.values[i - 1]);
}

double sup_gap(const PathSample& a, const PathSample& b) {
    double d = 0;
    for (double t : a.grid) d = std::max(d, std::abs(eval_path(a, t) - eval_path(b, t)));
    for (double t : b.grid) d = std::max(d, std::abs(eval_path(a, t) - eval_path(b, t)));
    return d;
}

// cells a sigma-clock in [0,1] can select, with their step values
std::vector<double> reachable_cell_values(const std::vector<u64>& obs,
                                          const SigmaTable& sigma, double B) {
    double lam = lam_of(sigma.family(), B);
    std::vector<double> vals;
    for (std::size_t i = 0; i <= sigma.index_le(B); ++i) {
        double S_prev = i ? sigma.S_at(i - 1) : 0.0;
        if (S_prev > lam) break;
        if (sigma.sigma_numerator(i) == 0) continue;
        vals.push_back((omega_le(obs, static_cast<double>(sigma.prime(i))) - sigma.S_at(i)) /
                       std::sqrt(lam));
    }
    return vals;
}

std::vector<double> distinct_consecutive(const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x != out.back()) out.push_back(x);
    return out;
}

} // namespace

TEST_SUITE("paths") {

TEST_CASE("counting path with no obstruction is the drift line") {
    double B = std::exp(std::exp(1.0)); // loglog B = 1
    auto prof = profile(family_st(), make_point(1, 1), table_1e5());
    auto path = path_X(prof, sigma_st(), B, 17);
    CHECK(path.grid.front() == 0.0);
    CHECK(path.grid.back() == 1.0);
    CHECK(path.normalization == Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < path.grid.size(); ++i)
        CHECK(path.values[i] == Approx(-path.grid[i]).epsilon(1e-9));
}

TEST_CASE("counting path hand value") {
    auto prof = profile(family_st(), make_point(1, 3), table_1e5());
    auto path = path_X(prof, sigma_st(), 100.0, 3);
    double lam = lam_of(family_st(), 100.0);

    // 3 uniform points plus the p = 3 jump and its companion
    REQUIRE(path.grid.size() == 5);
    CHECK(path.grid.back() == 1.0);
    CHECK(path.values.back() == Approx((2.0 - lam) / std::sqrt(lam)).epsilon(1e-12));
    CHECK(path.values.back() == Approx(0.3826).epsilon(1e-4));

    // at t = 0 the threshold is e, so only p = 2 is counted
    CHECK(path.values.front() == Approx(1.0 / std::sqrt(lam)).epsilon(1e-12));

    // indices 1, 2 are the companion and the jump at p = 3
    double t3 = std::log(std::log(3.0)) / std::log(std::log(100.0));
    CHECK(path.grid[2] == Approx(t3).epsilon(1e-15));
    CHECK(path.values[2] - path.values[1] == Approx(1.0 / std::sqrt(lam)).epsilon(1e-9));
}

TEST_CASE("counting path recovers integer counts along the grid") {
    struct Case {
        RationalPoint x;
        double B;
    };
    for (const auto& [x, B] : {Case{make_point(1, 3), 100.0},
                               Case{klapaklapa_point(4, table_1e5()), 10'000.0}}) {
        auto prof = profile(family_st(), x, table_1e5());
        auto path = path_X(prof, sigma_st(), B, 257);
        double lam = lam_of(family_st(), B);
        double prev = 0;
        for (std::size_t i = 0; i < path.grid.size(); ++i) {
            double w = path.values[i] * std::sqrt(lam) + path.grid[i] * lam;
            double r = std::round(w);
            CHECK(std::abs(w - r) < 1e-8);
            CHECK(r >= prev);
            CHECK(r <= static_cast<double>(prof.omega()));
            prev = r;
        }
        CHECK(path.values.back() * std::sqrt(lam) + lam ==
              Approx(static_cast<double>(prof.omega())).epsilon(1e-9));
    }
}

TEST_CASE("counting path start depends only on p = 2") {
    // c = 21 keeps 2 unobstructed, c = 3 does not
    auto p37 = profile(family_st(), make_point(3, 7), table_1e5());
    CHECK(path_X(p37, sigma_st(), 100.0, 9).values.front() == 0.0);
    auto p13 = profile(family_st(), make_point(1, 3), table_1e5());
    CHECK(path_X(p13, sigma_st(), 100.0, 9).values.front() > 0.0);
}

TEST_CASE("path functionals") {
    PathSample h;
    h.grid = {0.0, 0.5, 1.0};
    h.values = {-1.0, 2.0, -3.0};
    CHECK(functional_max(h) == 2.0);
    CHECK(functional_absmax(h) == 3.0);

    auto prof = profile(family_st(), make_point(1, 3), table_1e5());
    auto path = path_X(prof, sigma_st(), 100.0, 64);
    CHECK(functional_absmax(path) >= std::abs(functional_max(path)));
}

TEST_CASE("functionals are grid independent for step extrema") {
    struct Case {
        RationalPoint x;
        double B;
    };
    for (const auto& [x, B] : {Case{make_point(1, 3), 100.0},
                               Case{klapaklapa_point(4, table_1e5()), 10'000.0}}) {
        auto prof = profile(family_st(), x, table_1e5());
        for (auto* make : {&path_X, &path_Z}) {
            auto coarse = (*make)(prof, sigma_st(), B, 2);
            auto fine = (*make)(prof, sigma_st(), B, 256);
            CHECK(functional_max(coarse) == functional_max(fine));
            CHECK(functional_absmax(coarse) == functional_absmax(fine));
        }
    }
}

TEST_CASE("window path jumps by one minus sigma") {
    auto prof = profile(family_st(), make_point(1, -103), table_1e5());
    REQUIRE(prof.obstructing == std::vector<u64>{103});
    double B = 1e6;
    auto path = path_Y(prof, sigma_st(), B, 256);
    double lam = lam_of(family_st(), B);

    double t103 = std::log(std::log(103.0)) / std::log(std::log(B));
    auto it = std::find(path.grid.begin(), path.grid.end(), t103);
    REQUIRE(it != path.grid.end());
    std::size_t i = static_cast<std::size_t>(it - path.grid.begin());
    REQUIRE(i > 0);
    CHECK(path.values[i] - path.values[i - 1] ==
          Approx((1.0 - 2.0 / 104.0) / std::sqrt(lam)).epsilon(1e-12));

    // identically zero until the threshold passes log B
    for (std::size_t j = 0; j < path.grid.size(); ++j)
        if (path.grid[j] < 0.36) CHECK(path.values[j] == 0.0);
    // frozen once the threshold passes the window top
    for (std::size_t j = 0; j < path.grid.size(); ++j)
        if (path.grid[j] > 0.92) CHECK(path.values[j] == path.values.back());
}

TEST_CASE("window path tracks the counting path") {
    double B = 1e6;
    double total = 0;
    int n = 0;
    for (const auto& x : enumerate_points(30)) {
        if (family_st().evaluate(x.s, x.t) == 0) continue;
        if (n == 1000) break;
        auto prof = profile(family_st(), x, table_1e5());
        auto X = path_X(prof, sigma_st(), B, 256);
        auto Y = path_Y(prof, sigma_st(), B, 256);
        total += sup_gap(X, Y);
        ++n;
    }
    REQUIRE(n == 1000);
    double mean = total / n;
    CHECK(mean <= 0.8);
    CHECK(mean >= 0.05);
}

TEST_CASE("clock path without obstruction is nonincreasing") {
    auto prof = profile(family_st(), make_point(1, 1), table_1e5());
    auto path = path_Z(prof, sigma_st(), 10'000.0, 1024);
    CHECK(path.values.front() < 0.0);
    for (std::size_t i = 1; i < path.values.size(); ++i)
        CHECK(path.values[i] <= path.values[i - 1]);
}

TEST_CASE("clock path endpoint sits in the cell holding the full clock mass") {
    auto prof = profile(family_st(), make_point(1, 3), table_1e5());
    double B = 10'000.0;
    auto path = path_Z(prof, sigma_st(), B, 128);
    double lam = lam_of(family_st(), B);

    auto S = sigma_st().S_prefix();
    std::size_t last = sigma_st().index_le(B);
    auto it = std::upper_bound(S.begin(), S.begin() + static_cast<std::ptrdiff_t>(last) + 1,
                               lam);
    std::size_t cell = std::min(static_cast<std::size_t>(it - S.begin()), last);
    double expected =
        (omega_le(prof.obstructing, static_cast<double>(sigma_st().prime(cell))) -
         sigma_st().S_at(cell)) /
        std::sqrt(lam);
    CHECK(path.grid.back() == 1.0);
    CHECK(path.values.back() == Approx(expected).epsilon(1e-12));
}

TEST_CASE("clock path walks the reachable cells in order") {
    auto prof = profile(family_st(), make_point(1, 3), table_1e5());
    auto path = path_Z(prof, sigma_st(), 100.0, 1024);
    auto expected = reachable_cell_values(prof.obstructing, sigma_st(), 100.0);

    // lam = 1.527 lands inside the p = 11 cell: 2, 3, 7, 11 are reachable
    REQUIRE(expected.size() == 4);
    auto actual = distinct_consecutive(path.values);
    REQUIRE(actual.size() == expected.size());
    for (std::size_t i = 0; i < actual.size(); ++i)
        CHECK(actual[i] == Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("clock path extrema match a direct cell scan") {
    struct Case {
        RationalPoint x;
        double B;
    };
    for (const auto& [x, B] : {Case{make_point(1, 3), 100.0},
                               Case{klapaklapa_point(4, table_1e5()), 10'000.0}}) {
        auto prof = profile(family_st(), x, table_1e5());
        auto path = path_Z(prof, sigma_st(), B, 8192);
        auto cells = reachable_cell_values(prof.obstructing, sigma_st(), B);
        double mx = *std::max_element(cells.begin(), cells.end());
        double am = 0;
        for (double v : cells) am = std::max(am, std::abs(v));
        CHECK(functional_max(path) == Approx(mx).epsilon(1e-12));
        CHECK(functional_absmax(path) == Approx(am).epsilon(1e-12));
    }
}

TEST_CASE("quadratic functional matches the per prime audit") {
    SplitMix64 rng(991);
    double B = 1e5;
    int done = 0;
    while (done < 100) {
        const auto& fam = (done % 2 == 0) ? family_st() : family_quartic();
        const auto& sig = (done % 2 == 0) ? sigma_st() : sigma_quartic();
        auto x = sample_point(10'000, rng);
        if (fam.evaluate(x.s, x.t) == 0) continue;
        auto prof = profile(fam, x, table_1e5());
        double fast = functional_l2(prof, sig, B);
        double slow = functional_l2_reference(prof, sig, B);
        CHECK(fast == Approx(slow).epsilon(1e-10));
        ++done;
    }
}

TEST_CASE("quadratic functional with no obstruction") {
    auto prof = profile(family_st(), make_point(1, 1), table_1e5());
    double B = 1e4;
    double lam = lam_of(family_st(), B);
    double expected = sigma_st().sSS_at(sigma_st().index_le(B)) / (lam * lam);
    CHECK(functional_l2(prof, sigma_st(), B) == Approx(expected).epsilon(1e-14));
}

TEST_CASE("occupation functional") {
    // height below 16 is not applicable
    auto small = profile(family_st(), make_point(1, 3), table_1e5());
    CHECK(!functional_occupation(small, sigma_st()).has_value());
    auto small2 = profile(family_st(), make_point(3, 7), table_1e5());
    CHECK(!functional_occupation(small2, sigma_st()).has_value());

    // no obstruction, applicable height: zero mass
    auto clean = profile(family_st(), make_point(1, 17), table_1e5());
    auto occ0 = functional_occupation(clean, sigma_st());
    REQUIRE(occ0.has_value());
    CHECK(*occ0 == 0.0);

    // heavily obstructed products push the mass above the clock scale
    auto kk = profile(family_st(), klapaklapa_point(6, table_1e5()), table_1e5());
    auto occ = functional_occupation(kk, sigma_st());
    REQUIRE(occ.has_value());
    CHECK(*occ > 1.0);
    CHECK(*occ < 3.0);
}

TEST_CASE("occupation mass telescopes when every prime is in excess") {
    // omega(x, p) = pi(p) > S(p) everywhere, so the excess set is exactly
    // { S < 11 } and the total mass is 11 regardless of the table edge
    std::vector<u64> obs;
    for (std::size_t i = 0; obs.size() < 11; ++i) obs.push_back(table_1e5().primes()[i]);
    ProfileView pv(obs, 1e6);
    auto occ = functional_occupation(pv, sigma_st());
    REQUIRE(occ.has_value());
    CHECK(*occ == Approx(11.0 / std::log(std::log(1e6))).epsilon(1e-10));
}

TEST_CASE("kernel average") {
    auto prof = profile(family_st(), make_point(1, 3), table_1e5());
    double B = 1e4;
    double lam = lam_of(family_st(), B);

    // constant kernel integrates the sigma mass up to the threshold
    double t = 0.7;
    double T = std::exp(std::pow(std::log(B), t));
    double kt1 = k_tilde(prof, sigma_st(), B, t, [](double) { return 1.0; });
    CHECK(kt1 == Approx(sigma_st().S_at(sigma_st().index_le(T)) / lam).epsilon(1e-12));
    CHECK(std::abs(kt1 - t) < 0.35);

    CHECK(k_tilde(prof, sigma_st(), B, 0.5, [](double) { return 0.0; }) == 0.0);

    // positive part indicator recovers the excess mass
    double kti = k_tilde(prof, sigma_st(), B, 1.0, [](double y) { return y > 0 ? 1.0 : 0.0; });
    CHECK(kti == Approx(c_hat(prof, sigma_st(), B).value / lam).epsilon(1e-9));
}

TEST_CASE("csv export") {
    PathSample h;
    h.grid = {0.0, 0.5, 1.0};
    h.values = {1.0, 2.0, 3.0};
    std::ostringstream out;
    write_path_csv(out, h);
    CHECK(out.str() == "t,value\n0,1\n0.5,2\n1,3\n");
}

TEST_CASE("argument validation") {
    auto prof = profile(family_st(), make_point(1, 3), table_1e5());
    CHECK_THROWS_AS(path_X(prof, sigma_st(), 2.9), validation_error);
    CHECK_THROWS_AS(path_X(prof, sigma_st(), 100.0, 1), validation_error);
    CHECK_THROWS_AS(k_tilde(prof, sigma_st(), 1e4, -0.1, [](double) { return 1.0; }),
                    validation_error);
    CHECK_THROWS_AS(k_tilde(prof, sigma_st(), 1e4, 1.5, [](double) { return 1.0; }),
                    validation_error);

    // a table that stops short of what the construction needs is refused
    SigmaTable tiny = build_sigma_table(family_st(), 1000, table_1e5());
    CHECK_THROWS_AS(path_Y(prof, tiny, 1e6), validation_error);
    CHECK_THROWS_AS(path_Z(prof, tiny, 1e4), validation_error);
    CHECK_THROWS_AS(functional_l2(prof, tiny, 1e4), validation_error);
    CHECK_THROWS_AS(k_tilde(prof, tiny, 1e4, 0.5, [](double) { return 1.0; }),
                    validation_error);
}

} // TEST_SUITE
