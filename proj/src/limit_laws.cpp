#include "obwalks/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "obwalks/errors.hpp"
#include "obwalks/montecarlo.hpp"
#include "obwalks/rng.hpp"

namespace obwalks {

namespace {

constexpr double kPi = 3.14159265358979323846;

} // namespace

double gaussian_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double half_normal_tail(double z) {
    if (!(z >= 0)) throw validation_error("half_normal_tail: z must be nonnegative");
    return std::erfc(z * M_SQRT1_2);
}

double tau_infinity(double z) {
    if (!(z > 0)) throw validation_error("tau_infinity: z must be positive");
    const double a = kPi * kPi / (8.0 * z * z);
    double sum = 0, sign = 1;
    for (std::uint64_t m = 0;; ++m, sign = -sign) {
        if (m > 50'000'000)
            throw capacity_error("tau_infinity: series did not reach the cutoff");
        const double odd = 2.0 * static_cast<double>(m) + 1.0;
        const double term = std::exp(-a * odd * odd) / odd;
        if (term < 1e-12) break;
        sum += sign * term;
    }
    return 4.0 / kPi * sum;
}

double arcsine_cdf(double u) {
    if (!(u >= 0.0 && u <= 1.0))
        throw validation_error("arcsine_cdf: u must lie in [0,1]");
    return 2.0 / kPi * std::asin(std::sqrt(u));
}

namespace {

// deriv = false: 2 sum (-1)^m q^{(2m+1)^2/4} sin((2m+1)y)
// deriv = true:  its term-wise y-derivative
double theta_series(double y, double q, bool deriv) {
    if (!(q > 0.0 && q < 1.0))
        throw validation_error("theta series: q must lie in (0,1)");
    const double lq = std::log(q);
    double sum = 0, sign = 1;
    for (std::uint64_t m = 0;; ++m, sign = -sign) {
        if (m > 50'000'000)
            throw capacity_error("theta series: q too close to 1");
        const double odd = 2.0 * static_cast<double>(m) + 1.0;
        const double w = std::exp(lq * odd * odd / 4.0);
        if (w < 1e-15) break;
        sum += deriv ? sign * odd * w * std::cos(odd * y)
                     : sign * w * std::sin(odd * y);
    }
    return 2.0 * sum;
}

} // namespace

double theta1(double y, double q) { return theta_series(y, q, false); }
double theta2(double y, double q) { return theta_series(y, q, true); }

namespace {

// Cached table of tau2 on z = 0, 0.004, ..., 12. The inner t-integral is
// desingularized by t = pi/2 - w^2 (then (cos t)^{-1/2} dt = 2w/sqrt(sin w^2) dw,
// bounded) and done by 512-panel Simpson; the outer u-integral accumulates
// Simpson pairs on a 0.001 mesh, so every table entry is a converged prefix.
// The u -> 0 end is entered as 0: theta2(., e^{-1/4u}) vanishes faster than
// u^{3/2}.
struct Tau2Table {
    static constexpr double z_step = 0.004;
    static constexpr double z_max = 12.0;
    std::vector<double> value;
};

constexpr std::size_t kInnerPanels = 512;
constexpr std::size_t kThetaTerms = 40;

// Simpson over the w-grid of E(w) * theta2(y(w), q) with the cos factors of
// the theta series pretabulated per node (they do not depend on u).
struct InnerGrid {
    std::size_t nodes = kInnerPanels + 1;
    double hw = 0;
    std::vector<double> envelope;  // 2w / sqrt(sin w^2), times Simpson weight
    std::vector<double> cosines;   // cos((2m+1) y_i), i-major
};

InnerGrid make_inner_grid(std::size_t panels) {
    InnerGrid g;
    g.nodes = panels + 1;
    g.hw = std::sqrt(kPi / 2.0) / static_cast<double>(panels);
    g.envelope.resize(g.nodes);
    g.cosines.resize(g.nodes * kThetaTerms);
    for (std::size_t i = 0; i < g.nodes; ++i) {
        const double w = static_cast<double>(i) * g.hw;
        const double w2 = w * w;
        const double env = w2 < 1e-12 ? 2.0 : 2.0 * w / std::sqrt(std::sin(w2));
        const double simpson =
            (i == 0 || i + 1 == g.nodes) ? 1.0 : (i & 1 ? 4.0 : 2.0);
        g.envelope[i] = env * simpson * g.hw / 3.0;
        const double y = (kPi / 2.0 - w2) / 2.0;
        for (std::size_t m = 0; m < kThetaTerms; ++m)
            g.cosines[i * kThetaTerms + m] =
                std::cos((2.0 * static_cast<double>(m) + 1.0) * y);
    }
    return g;
}

// int_0^{pi/2} theta2(t/2, e^{-1/(4u)}) (cos t)^{-1/2} dt
double tau2_inner(const InnerGrid& g, double u) {
    const double lq = -1.0 / (4.0 * u); // log q
    double coef[kThetaTerms];
    std::size_t terms = 0;
    double sign = 2.0;
    while (terms < kThetaTerms) {
        const double odd = 2.0 * static_cast<double>(terms) + 1.0;
        const double w = std::exp(lq * odd * odd / 4.0);
        if (w < 1e-15) break;
        coef[terms] = sign * odd * w;
        sign = -sign;
        ++terms;
    }
    if (terms == kThetaTerms)
        throw capacity_error("tau2: theta series exceeded the coefficient table");
    double sum = 0;
    for (std::size_t i = 0; i < g.nodes; ++i) {
        const double* c = &g.cosines[i * kThetaTerms];
        double t2 = 0;
        for (std::size_t m = 0; m < terms; ++m) t2 += coef[m] * c[m];
        sum += g.envelope[i] * t2;
    }
    return sum;
}

Tau2Table build_tau2_table() {
    const InnerGrid grid = make_inner_grid(kInnerPanels);
    const double hu = 0.001;
    const std::size_t fine = 6000; // u up to 6, z up to 12
    std::vector<double> g(fine + 1, 0.0);
    for (std::size_t j = 1; j <= fine; ++j) {
        const double u = static_cast<double>(j) * hu;
        double v = tau2_inner(grid, u) / (u * std::sqrt(u));
        if (v < 0) {
            if (v < -1e-9) throw capacity_error("tau2: negative quadrature mass");
            v = 0;
        }
        g[j] = v;
    }

    // The mass of the double integral is exactly 16 (Abel summation of the
    // theta series turns the inner integral into pi), so the CDF normalization
    // is 1/(4 pi^{3/2}).
    Tau2Table table;
    table.value.resize(fine / 2 + 1);
    const double scale = 1.0 / (4.0 * kPi * std::sqrt(kPi));
    long double acc = 0;
    table.value[0] = 0;
    for (std::size_t k = 1; k <= fine / 2; ++k) {
        acc += hu / 3.0 * (g[2 * k - 2] + 4.0 * g[2 * k - 1] + g[2 * k]);
        table.value[k] = scale * static_cast<double>(acc);
    }

    // convergence gates: total mass and inner-grid refinement
    if (std::abs(table.value.back() - 1.0) > 5e-4)
        throw capacity_error("tau2: quadrature mass " +
                             std::to_string(table.value.back()) +
                             " did not converge to 1");
    const InnerGrid finer = make_inner_grid(2 * kInnerPanels);
    for (double u : {0.5, 2.0, 5.0}) {
        const double a = tau2_inner(grid, u), b = tau2_inner(finer, u);
        if (std::abs(a - b) > 1e-8 * std::max(1.0, std::abs(a)))
            throw capacity_error("tau2: inner quadrature not converged");
    }
    return table;
}

} // namespace

double tau2(double z) {
    if (!(z >= 0)) throw validation_error("tau2: z must be nonnegative");
    static const Tau2Table table = build_tau2_table();
    if (z >= Tau2Table::z_max) return 1.0;
    const double pos = z / Tau2Table::z_step;
    const std::size_t j = std::min(static_cast<std::size_t>(pos), table.value.size() - 2);
    const double frac = pos - static_cast<double>(j);
    return table.value[j] + frac * (table.value[j + 1] - table.value[j]);
}

namespace {

struct OdeState {
    double p, d;
};

// classical RK4 for p' = d, d' = c(x) p
template <class Coef>
OdeState rk4_step(const Coef& c, double x, double dx, OdeState y) {
    auto f = [&](double xx, OdeState s) { return OdeState{s.d, c(xx) * s.p}; };
    const OdeState k1 = f(x, y);
    const OdeState k2 = f(x + dx / 2, {y.p + dx / 2 * k1.p, y.d + dx / 2 * k1.d});
    const OdeState k3 = f(x + dx / 2, {y.p + dx / 2 * k2.p, y.d + dx / 2 * k2.d});
    const OdeState k4 = f(x + dx, {y.p + dx * k3.p, y.d + dx * k3.d});
    return {y.p + dx / 6 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p),
            y.d + dx / 6 * (k1.d + 2 * k2.d + 2 * k3.d + k4.d)};
}

// Integrates from boundary node `from` to center node `to`, storing psi at every
// node. Inward integration amplifies the decaying solution, so boundary WKB data
// psi = 1, psi' = -+ kappa is exact at the center up to e^{-2 int kappa}.
template <class Coef>
OdeState integrate_branch(std::vector<double>& psi, std::size_t from, std::size_t to,
                          double x_from, double h, const Coef& c) {
    const bool rightward = to > from;
    const double dx = rightward ? h : -h;
    const double kappa = std::sqrt(c(x_from));
    OdeState y{1.0, rightward ? kappa : -kappa};
    psi[from] = y.p;
    std::size_t node = from;
    double x = x_from;
    while (node != to) {
        y = rk4_step(c, x, dx, y);
        node = rightward ? node + 1 : node - 1;
        x += dx;
        psi[node] = y.p;
        if (std::abs(y.p) > 1e150) {
            y.p *= 1e-150;
            y.d *= 1e-150;
            const std::size_t lo = std::min(from, node), hi = std::max(from, node);
            for (std::size_t i = lo; i <= hi; ++i) psi[i] *= 1e-150;
        }
    }
    return y;
}

double simpson(const std::vector<double>& f, std::size_t a, std::size_t b, double h) {
    long double s = f[a] + f[b];
    for (std::size_t i = a + 1; i < b; ++i) s += ((i - a) & 1 ? 4.0L : 2.0L) * f[i];
    return static_cast<double>(s * h / 3.0);
}

} // namespace

FundamentalSolution fk_solve(double s, double u,
                             const std::function<double(double)>& K,
                             double h_scale) {
    if (!(s > 0) || !(u > 0))
        throw validation_error("fk_solve: s and u must be positive");
    if (!K) throw validation_error("fk_solve: missing potential");
    if (!(h_scale > 0) || h_scale > 1.0)
        throw validation_error("fk_solve: h_scale must lie in (0,1]");

    FundamentalSolution fs;
    fs.s = s;
    fs.u = u;
    fs.L = 20.0 / std::sqrt(2.0 * s);

    double k_sup = 0;
    for (std::size_t i = 0; i <= 8192; ++i) {
        const double x = -fs.L + 2.0 * fs.L * static_cast<double>(i) / 8192.0;
        const double v = K(x);
        if (!std::isfinite(v) || v < 0)
            throw validation_error("fk_solve: K must be bounded nonnegative");
        k_sup = std::max(k_sup, v);
    }

    const double h0 = 1e-3 * std::min(1.0, 1.0 / std::sqrt(2.0 * (s + u * k_sup))) * h_scale;
    std::size_t n_half = static_cast<std::size_t>(std::ceil(fs.L / h0));
    n_half += n_half & 1;
    fs.h = fs.L / static_cast<double>(n_half);
    fs.center = n_half;
    fs.psi.assign(2 * n_half + 1, 0.0);

    const auto coef = [&](double x) { return 2.0 * (s + u * K(x)); };
    const OdeState left = integrate_branch(fs.psi, 0, n_half, -fs.L, fs.h, coef);
    const OdeState right = integrate_branch(fs.psi, 2 * n_half, n_half, fs.L, fs.h, coef);

    // scale branches: continuity A psiL = B psiR, jump B psiR' - A psiL' = -2
    const double wron = left.p * right.d - left.d * right.p;
    if (!(std::abs(wron) > 0))
        throw numerical_error("fk_solve: degenerate branch pairing");
    const double A = -2.0 * right.p / wron;
    const double B = -2.0 * left.p / wron;
    for (std::size_t i = 0; i < n_half; ++i) fs.psi[i] *= A;
    for (std::size_t i = n_half + 1; i <= 2 * n_half; ++i) fs.psi[i] *= B;
    const double c_left = A * left.p, c_right = B * right.p;
    if (std::abs(c_left - c_right) > 1e-10 * std::abs(c_right))
        throw internal_error("fk_solve: center mismatch after scaling");
    fs.psi[n_half] = c_right;

    double peak = 0;
    for (double v : fs.psi) {
        if (v < 0) throw numerical_error("fk_solve: negative solution values");
        peak = std::max(peak, v);
    }
    if (!(fs.psi.front() < 1e-8 * peak) || !(fs.psi.back() < 1e-8 * peak))
        throw numerical_error("fk_solve: boundary decay condition failed");

    // one-sided 5-point derivatives at the center, order h^4
    const auto& p = fs.psi;
    const std::size_t n = n_half;
    const double dr = (-25 * p[n] + 48 * p[n + 1] - 36 * p[n + 2] + 16 * p[n + 3] -
                       3 * p[n + 4]) /
                      (12 * fs.h);
    const double dl = (25 * p[n] - 48 * p[n - 1] + 36 * p[n - 2] - 16 * p[n - 3] +
                       3 * p[n - 4]) /
                      (12 * fs.h);
    const double residual = std::abs(dr - dl + 2.0);
    if (residual > 1e-6)
        throw numerical_error("fk_solve: derivative jump residual " +
                              std::to_string(residual));

    fs.integral =
        simpson(fs.psi, 0, n_half, fs.h) + simpson(fs.psi, n_half, 2 * n_half, fs.h);
    return fs;
}

FkMcResult fk_lhs_mc(double s, double u, const std::function<double(double)>& K,
                     std::size_t n_walks, std::size_t steps_per_unit,
                     double t_max, arith::u64 master_seed, unsigned threads) {
    if (!(s > 0) || !(u > 0))
        throw validation_error("fk_lhs_mc: s and u must be positive");
    if (!K) throw validation_error("fk_lhs_mc: missing potential");
    if (!(t_max * s >= 20.0))
        throw validation_error("fk_lhs_mc: need t_max * s >= 20");
    if (steps_per_unit < 16)
        throw validation_error("fk_lhs_mc: need at least 16 steps per unit time");

    const double dt = 1.0 / static_cast<double>(steps_per_unit);
    const std::size_t n_steps =
        static_cast<std::size_t>(std::llround(t_max * static_cast<double>(steps_per_unit)));
    const double root_dt = std::sqrt(dt);
    const double rho = std::exp(-s * dt);

    // The walk lives on the lattice m sqrt(dt); e^{-st} and the exp(-u int K)
    // update multiply into one factor per lattice edge, so the per-step work is
    // one table lookup. K is read at edge midpoints: for a discontinuous K the
    // midpoint matches the expected bridge occupation of the edge, which kills
    // the O(sqrt dt) boundary bias of endpoint averaging.
    const double origin = static_cast<double>(n_steps) - 0.5;
    std::vector<double> edge(2 * n_steps);
    for (std::size_t i = 0; i < edge.size(); ++i) {
        const double x = (static_cast<double>(i) - origin) * root_dt;
        const double v = K(x);
        if (!std::isfinite(v) || v < 0)
            throw validation_error("fk_lhs_mc: K must be bounded nonnegative");
        edge[i] = rho * std::exp(-u * dt * v);
    }

    const auto one_walk = [&](SplitMix64& rng) {
        BitStepper bits{rng};
        std::size_t at = n_steps;
        double g = 1.0;
        double sum = 0.5; // trapezoid half-weight at t = 0
        for (std::size_t k = 1; k < n_steps; ++k) {
            if (bits.step() > 0) {
                g *= edge[at];
                ++at;
            } else {
                --at;
                g *= edge[at];
            }
            sum += g;
        }
        if (bits.step() > 0)
            g *= edge[at];
        else
            g *= edge[at - 1];
        return (sum + 0.5 * g) * dt;
    };

    const EmpiricalDistribution emp = mc_functional_distribution(
        one_walk, n_walks, master_seed, rng_tag::fk_walks, threads);

    long double mean = 0;
    for (double v : emp.values) mean += v;
    mean /= static_cast<long double>(emp.values.size());
    long double var = 0;
    for (double v : emp.values) var += (v - mean) * (v - mean);
    var /= static_cast<long double>(emp.values.size() - 1);

    FkMcResult res;
    res.value = static_cast<double>(mean);
    res.std_error =
        static_cast<double>(std::sqrt(var / static_cast<long double>(emp.values.size())));
    return res;
}

} // namespace obwalks
