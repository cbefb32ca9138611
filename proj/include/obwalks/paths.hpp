#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "obwalks/obstruction.hpp"

namespace obwalks {

// The path constructions only read the obstructing prime list and a height,
// so genuine profiles and sampled synthetic ones share this view.
struct ProfileView {
    std::span<const arith::u64> obstructing; // ascending
    double height = 0;                       // only functional_occupation reads it

    ProfileView(const ObstructionProfile& p)
        : obstructing(p.obstructing), height(static_cast<double>(p.point.height())) {}
    ProfileView(std::span<const arith::u64> obs, double h) : obstructing(obs), height(h) {}
};

// Normalized prime-counting path on the doubly logarithmic clock t in [0,1],
// threshold T(t) = exp((log B)^t).
struct PathSample {
    enum class Kind { X, Y, Z };
    Kind kind = Kind::X;
    double B = 0;
    std::vector<double> grid;   // ascending, grid.front() = 0, grid.back() = 1
    std::vector<double> values; // same length
    double normalization = 0;   // delta * log log B
};

// X(t) = (omega(x, T(t)) - t * delta * loglog B) / sqrt(delta * loglog B).
// The grid is m uniform points plus every jump abscissa together with a
// just-before companion, so step extrema are sampled exactly.
PathSample path_X(ProfileView prof, const SigmaTable& sigma, double B,
                  std::size_t m = 256);

// Centered indicator sums restricted to primes in (log B, B^psi(B)] with
// psi(B) = (loglog B)^(-1/4): obstructing primes contribute 1 - sigma_p,
// others -sigma_p, normalized like X.
PathSample path_Y(ProfileView prof, const SigmaTable& sigma, double B,
                  std::size_t m = 256);

// The sigma-clock step path: t picks the prime cell with
// S(p-) <= t * delta * loglog B < S(p), value (omega(x,p) - S(p)) / sqrt(...).
// Clock times past S(B) clamp to the final cell.
PathSample path_Z(ProfileView prof, const SigmaTable& sigma, double B,
                  std::size_t m = 256);

double functional_max(const PathSample& path);
double functional_absmax(const PathSample& path);

// (1/(delta loglog B)^2) * sum_{p<=B} sigma_p (omega(x,p) - S(p))^2.
// Segment sums via the prefix tables, O(omega) per profile; the _reference
// version is the O(pi(B)) per-prime audit loop.
double functional_l2(ProfileView prof, const SigmaTable& sigma, double B);
double functional_l2_reference(ProfileView prof, const SigmaTable& sigma, double B);

// Total sigma-mass of the excess set over delta * loglog H. Heights below 16
// keep loglog H under 1 and are reported as not-applicable. Mass beyond the
// table limit is continued with S(p) ~ S(limit) + delta*(loglog p - loglog limit);
// the first uncovered prime contributes at most sigma_p ~ 2 delta / limit error.
std::optional<double> functional_occupation(ProfileView prof, const SigmaTable& sigma);

// (1/(delta loglog B)) * sum_{p <= T(t)} sigma_p K((omega(x,p)-S(p))/sqrt(...)),
// per-prime evaluation since K is arbitrary.
double k_tilde(ProfileView prof, const SigmaTable& sigma, double B, double t,
               const std::function<double(double)>& K);

// CSV rows "t,value" with a header line.
void write_path_csv(std::ostream& out, const PathSample& path);

} // namespace obwalks
