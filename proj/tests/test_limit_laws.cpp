#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "obwalks/limit_laws.hpp"
#include "obwalks/montecarlo.hpp"
#include "obwalks/stats.hpp"

using namespace obwalks;
using doctest::Approx;

namespace {

const std::function<double(double)> k_zero = [](double) { return 0.0; };
const std::function<double(double)> k_indicator = [](double x) {
    return x > 0.0 ? 1.0 : 0.0;
};
const std::function<double(double)> k_square = [](double x) {
    return std::min(x * x, 25.0);
};

// int_0^inf e^{-st} / sqrt(cosh(sqrt(2u) t)) dt, the transform of the
// quadratic-potential survival probability, by fine composite Simpson
double quadratic_reference(double s, double u) {
    const double lam = std::sqrt(2.0 * u);
    const double top = 50.0 / s;
    const std::size_t n = 200'000; // even
    const double h = top / static_cast<double>(n);
    long double sum = 1.0; // integrand at t = 0
    for (std::size_t i = 1; i < n; ++i) {
        const double t = static_cast<double>(i) * h;
        sum += ((i & 1) ? 4.0L : 2.0L) * std::exp(-s * t) / std::sqrt(std::cosh(lam * t));
    }
    sum += std::exp(-s * top) / std::sqrt(std::cosh(lam * top));
    return static_cast<double>(sum * h / 3.0);
}

} // namespace

TEST_SUITE("limit_laws") {

TEST_CASE("gaussian cdf") {
    CHECK(gaussian_cdf(0.0) == 0.5);
    CHECK(std::abs(gaussian_cdf(1.0) - 0.8413447460685429) < 1e-10);
    CHECK(gaussian_cdf(40.0) == 1.0);
    CHECK(gaussian_cdf(-40.0) == 0.0);
    for (double x : {0.3, 1.7, 2.9})
        CHECK(gaussian_cdf(x) + gaussian_cdf(-x) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("half normal tail") {
    CHECK(half_normal_tail(0.0) == 1.0);
    CHECK(std::abs(half_normal_tail(1.0) - 0.3173105078629141) < 1e-10);
    CHECK(half_normal_tail(50.0) == 0.0);
    for (double x : {0.1, 0.9, 2.5})
        CHECK(half_normal_tail(x) ==
              Approx(2.0 * (1.0 - gaussian_cdf(x))).epsilon(1e-13));
    CHECK_THROWS_AS(half_normal_tail(-0.1), validation_error);
}

TEST_CASE("absolute maximum law") {
    const double a = M_PI * M_PI / 8.0;
    const double hand =
        4.0 / M_PI *
        (std::exp(-a) - std::exp(-9.0 * a) / 3.0 + std::exp(-25.0 * a) / 5.0);
    CHECK(tau_infinity(1.0) == Approx(hand).epsilon(1e-13));
    CHECK(tau_infinity(1.0) == Approx(0.3708).epsilon(0.0014)); // 0.3708 +- 0.0005
    CHECK(tau_infinity(2.0) > tau_infinity(1.0));
    CHECK(tau_infinity(50.0) == Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(tau_infinity(0.0), validation_error);
    CHECK_THROWS_AS(tau_infinity(-1.0), validation_error);
}

TEST_CASE("arcsine law") {
    CHECK(arcsine_cdf(0.0) == 0.0);
    CHECK(arcsine_cdf(1.0) == Approx(1.0).epsilon(1e-15));
    CHECK(arcsine_cdf(0.5) == Approx(0.5).epsilon(1e-15));
    CHECK(arcsine_cdf(0.25) == Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK_THROWS_AS(arcsine_cdf(-0.01), validation_error);
    CHECK_THROWS_AS(arcsine_cdf(1.01), validation_error);
}

TEST_CASE("theta series") {
    CHECK(theta1(0.0, 0.3) == 0.0);
    CHECK(theta1(1.4, 0.3) == -theta1(-1.4, 0.3));

    // q small enough that exactly one term survives the 1e-15 cutoff
    const double q = 1e-13;
    CHECK(theta1(1.1, q) == Approx(2.0 * std::pow(q, 0.25) * std::sin(1.1)).epsilon(1e-12));
    CHECK(theta2(1.1, q) == Approx(2.0 * std::pow(q, 0.25) * std::cos(1.1)).epsilon(1e-12));

    double hand = 0;
    for (int m = 0; m < 5; ++m) {
        const double odd = 2 * m + 1;
        hand += (m % 2 ? -2.0 : 2.0) * odd * std::pow(0.3, odd * odd / 4.0);
    }
    CHECK(theta2(0.0, 0.3) == Approx(hand).epsilon(1e-13));
    CHECK(theta2(0.0, 0.3) > 0.0);

    for (double y : {0.3, 0.7, 1.2})
        for (double qq : {0.1, 0.5, 0.9}) {
            const double eps = 1e-5;
            const double fd = (theta1(y + eps, qq) - theta1(y - eps, qq)) / (2 * eps);
            CHECK(std::abs(theta2(y, qq) - fd) < 1e-6);
        }

    CHECK_THROWS_AS(theta1(0.5, 1.0), validation_error);
    CHECK_THROWS_AS(theta2(0.5, 1.5), validation_error);
    CHECK_THROWS_AS(theta1(0.5, 0.0), validation_error);
    CHECK_THROWS_AS(theta1(0.5, -0.3), validation_error);
}

TEST_CASE("squared path integral law") {
    CHECK(tau2(0.0) == 0.0);
    CHECK(tau2(20.0) == 1.0);
    CHECK(tau2(11.9) == Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(tau2(11.999) - tau2(12.001)) < 1e-4);
    CHECK_THROWS_AS(tau2(-0.5), validation_error);

    // Laplace transform against the closed form E e^{-A} = 1/sqrt(cosh(sqrt 2)),
    // A the squared-path integral: integrate e^{-z} tau2(z) by parts over z
    const std::size_t n = 3000; // even, step 0.004 up to z = 12
    long double sum = 0;        // integrand at 0 is 0
    for (std::size_t i = 1; i < n; ++i) {
        const double z = 0.004 * static_cast<double>(i);
        sum += ((i & 1) ? 4.0L : 2.0L) * std::exp(-z) * tau2(z);
    }
    sum += std::exp(-12.0) * tau2(12.0);
    const double laplace = static_cast<double>(sum * 0.004 / 3.0) + std::exp(-12.0);
    CHECK(std::abs(laplace - 1.0 / std::sqrt(std::cosh(std::sqrt(2.0)))) < 2e-3);
}

TEST_CASE("squared path integral law matches simulation") {
    const std::size_t n_walks = 100'000, n_steps = 10'000;
    std::vector<double> l2(n_walks);
    for (std::size_t i = 0; i < n_walks; ++i) {
        SplitMix64 rng = derive_stream(47, rng_tag::walks, i);
        l2[i] = walk_functionals(n_steps, rng).l2;
    }
    auto emp = make_empirical(std::move(l2));
    CHECK(ks_distance(emp, [](double v) { return v < 0 ? 0.0 : tau2(v); }) < 0.01);
}

TEST_CASE("fundamental solution closed forms") {
    auto free2 = fk_solve(2.0, 1.0, k_zero);
    CHECK(free2.integral == Approx(0.5).epsilon(1e-6));
    CHECK(free2.psi[free2.center] == Approx(0.5).epsilon(1e-8));
    CHECK(free2.x(free2.center) == Approx(0.0).epsilon(1e-12));
    CHECK(free2.x(0) == -free2.L);
    for (std::size_t i = 0; i < free2.psi.size(); i += 1000)
        CHECK(free2.psi[i] ==
              Approx(free2.psi[free2.psi.size() - 1 - i]).epsilon(1e-12));

    CHECK(fk_solve(1.0, 3.0, k_indicator).integral == Approx(0.5).epsilon(1e-3));
    CHECK(fk_solve(1.0, 1.0, k_indicator).integral ==
          Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));

    const double got = fk_solve(1.0, 1.0, k_square).integral;
    const double ref = quadratic_reference(1.0, 1.0);
    CHECK(got > 1.0 / 26.0);
    CHECK(got < 1.0);
    CHECK(got > ref - 1e-3); // clamping K only raises the solution
    CHECK(got < ref + 0.01);
}

TEST_CASE("fundamental solution invariants") {
    auto fs = fk_solve(1.0, 3.0, k_indicator);
    double peak = 0;
    for (double v : fs.psi) {
        CHECK(v >= 0.0);
        peak = std::max(peak, v);
    }
    CHECK(fs.psi.front() < 1e-8 * peak);
    CHECK(fs.psi.back() < 1e-8 * peak);

    auto fine = fk_solve(1.0, 3.0, k_indicator, 0.5);
    CHECK(std::abs(fine.integral - fs.integral) < 1e-5);

    CHECK_THROWS_AS(fk_solve(0.0, 1.0, k_zero), validation_error);
    CHECK_THROWS_AS(fk_solve(1.0, -1.0, k_zero), validation_error);
    CHECK_THROWS_AS(fk_solve(1.0, 1.0, k_zero, 0.0), validation_error);
    CHECK_THROWS_AS(fk_solve(1.0, 1.0, k_zero, 1.5), validation_error);
    CHECK_THROWS_AS(fk_solve(1.0, 1.0, [](double) { return -1.0; }), validation_error);
    CHECK_THROWS_AS(fk_solve(1.0, 1.0, std::function<double(double)>()), validation_error);
}

TEST_CASE("laplace side by simulation") {
    // K = 0 walks are deterministic: the estimator reduces to the trapezoid
    auto flat = fk_lhs_mc(2.0, 1.0, k_zero, 200, 256, 10.0, 9);
    CHECK(std::abs(flat.value - 0.5) < 1e-3);
    CHECK(flat.std_error == 0.0);

    auto a = fk_lhs_mc(1.0, 3.0, k_indicator, 2000, 512, 20.0, 11, 1);
    auto b = fk_lhs_mc(1.0, 3.0, k_indicator, 2000, 512, 20.0, 11, 3);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);

    auto ind = fk_lhs_mc(1.0, 3.0, k_indicator, 20'000, 1024, 20.0, 13);
    CHECK(std::abs(ind.value - 0.5) < 3.0 * (ind.std_error + 1e-3));

    auto killed = fk_lhs_mc(1.0, 1e4, [](double) { return 1.0; }, 200, 256, 20.0, 17);
    CHECK(killed.value < 5e-3);

    CHECK_THROWS_AS(fk_lhs_mc(1.0, 1.0, k_zero, 200, 256, 10.0, 1), validation_error);
    CHECK_THROWS_AS(fk_lhs_mc(1.0, 1.0, k_zero, 200, 8, 20.0, 1), validation_error);
    CHECK_THROWS_AS(fk_lhs_mc(1.0, 1.0, k_zero, 50, 256, 20.0, 1), validation_error);
}

TEST_CASE("cdf evaluators are monotone and bounded") {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = gaussian_cdf(-8.0 + 16.0 * i / 1000.0);
        CHECK(v >= prev);
        CHECK(v <= 1.0);
        prev = v;
    }
    prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double v = tau_infinity(6.0 * i / 1000.0);
        CHECK(v >= prev);
        CHECK(v <= 1.0);
        prev = v;
    }
    prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = arcsine_cdf(static_cast<double>(i) / 1000.0);
        CHECK(v >= prev);
        CHECK(v <= 1.0);
        prev = v;
    }
    prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = tau2(14.0 * i / 1000.0);
        CHECK(v >= prev);
        CHECK(v <= 1.0);
        prev = v;
    }
    prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = half_normal_tail(8.0 * i / 1000.0);
        CHECK(v <= prev);
        CHECK(v >= 0.0);
        prev = v;
    }
}

} // TEST_SUITE
