#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "obwalks/arith.hpp"

namespace obwalks {

// Standard normal CDF, absolute error below 1e-10.
double gaussian_cdf(double z);

// P(|N(0,1)| > z) for z >= 0.
double half_normal_tail(double z);

// Distribution function of the running maximum of |Brownian motion| on [0,1]:
// (4/pi) sum_m (-1)^m/(2m+1) exp(-(2m+1)^2 pi^2 / (8 z^2)), z > 0.
// Alternating, so the truncation error is at most the first omitted term.
double tau_infinity(double z);

// P(occupation time of (0,inf) by Brownian motion on [0,1] <= u)
// = (2/pi) asin(sqrt(u)), u in [0,1].
double arcsine_cdf(double u);

// theta1(y,q) = 2 sum_m (-1)^m q^{(2m+1)^2/4} sin((2m+1)y), 0 < q < 1,
// truncated once q^{(2m+1)^2/4} drops below 1e-15. theta2 = d/dy theta1.
double theta1(double y, double q);
double theta2(double y, double q);

// Distribution function of int_0^1 W(t)^2 dt for Brownian motion W:
// tau2(z) = 4/pi^{3/2} int_{0<u<z/2} int_{0<t<pi/2}
//              theta2(t/2, e^{-1/4u}) (cos t)^{-1/2} u^{-3/2} dt du.
// Evaluated from a cached quadrature table, absolute error below 1e-4.
double tau2(double z);

// Fundamental solution of (1/2) Psi'' = (s + u K(x)) Psi on [-L, L] with
// two-sided decay and derivative jump Psi'(+0) - Psi'(-0) = -2.
struct FundamentalSolution {
    double s = 0;
    double u = 0;
    double L = 0;        // half-width, sqrt(2s) L = 20
    double h = 0;        // mesh step, L / (psi.size()/2 rounded even)
    std::size_t center = 0;
    std::vector<double> psi;
    double integral = 0; // composite Simpson of psi over [-L, L]

    double x(std::size_t i) const { return -L + static_cast<double>(i) * h; }
};

// Integrates inward from both ends with decaying data, then scales the two
// branches to be continuous at 0 with the -2 derivative jump. h_scale < 1
// refines the mesh for grid-convergence checks.
FundamentalSolution fk_solve(double s, double u,
                             const std::function<double(double)>& K,
                             double h_scale = 1.0);

// Monte-Carlo value of int_0^tmax e^{-st} E exp(-u int_0^t K(W)) dt over
// scaled +-1 walks with trapezoidal time integration.
struct FkMcResult {
    double value = 0;
    double std_error = 0;
};

FkMcResult fk_lhs_mc(double s, double u, const std::function<double(double)>& K,
                     std::size_t n_walks, std::size_t steps_per_unit,
                     double t_max, arith::u64 master_seed, unsigned threads = 0);

} // namespace obwalks
