#include "obwalks/paths.hpp"

#include <algorithm>
#include <cmath>

#include "obwalks/errors.hpp"

namespace obwalks {

using arith::u64;

namespace {

struct Clock {
    double B, log_B, loglog_B, lam, root;
};

Clock make_clock(const SigmaTable& sigma, double B, std::size_t m) {
    if (B < 3) throw validation_error("paths: B must be >= 3, log log B degenerates below");
    if (m < 2) throw validation_error("paths: grid needs at least the two endpoints");
    Clock c;
    c.B = B;
    c.log_B = std::log(B);
    c.loglog_B = std::log(c.log_B);
    c.lam = sigma.family().delta() * c.loglog_B;
    c.root = std::sqrt(c.lam);
    return c;
}

// t -> threshold T(t) = exp((log B)^t); endpoints pinned to e and B exactly.
double threshold_at(const Clock& c, double t) {
    if (t == 0.0) return std::exp(1.0);
    if (t == 1.0) return c.B;
    return std::exp(std::pow(c.log_B, t));
}

// clock time of a prime threshold, log log p / log log B
double clock_of(const Clock& c, double p) { return std::log(std::log(p)) / c.loglog_B; }

unsigned count_le(std::span<const u64> obs, double T) {
    auto it = std::upper_bound(obs.begin(), obs.end(), T,
                               [](double t, u64 p) { return t < static_cast<double>(p); });
    return static_cast<unsigned>(it - obs.begin());
}

// (t, threshold) evaluation points: m uniform samples plus each jump prime
// with a just-before companion so both sides of every step are sampled.
// Jump entries go in first; stable sort + unique then prefers their exact
// thresholds over the exp/pow reconstruction at a colliding uniform t.
std::vector<std::pair<double, double>> grid_with_jumps(const Clock& c, std::size_t m,
                                                       std::span<const u64> jumps,
                                                       double jump_lo, double jump_hi) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(m + 2 * jumps.size());
    for (u64 p : jumps) {
        double pd = static_cast<double>(p);
        if (pd <= jump_lo) continue; // already counted from t = 0 on
        if (pd > jump_hi) break;
        double t = clock_of(c, pd);
        pts.emplace_back(t, pd);
        if (t > 0) pts.emplace_back(std::nextafter(t, 0.0), std::nextafter(pd, 0.0));
    }
    for (std::size_t i = 0; i < m; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(m - 1);
        pts.emplace_back(t, threshold_at(c, t));
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              pts.end());
    return pts;
}

} // namespace

PathSample path_X(ProfileView prof, const SigmaTable& sigma, double B, std::size_t m) {
    Clock c = make_clock(sigma, B, m);
    auto pts = grid_with_jumps(c, m, prof.obstructing, std::exp(1.0), B);
    PathSample path;
    path.kind = PathSample::Kind::X;
    path.B = B;
    path.normalization = c.lam;
    path.grid.reserve(pts.size());
    path.values.reserve(pts.size());
    for (auto [t, T] : pts) {
        double omega = count_le(prof.obstructing, T);
        path.grid.push_back(t);
        path.values.push_back((omega - t * c.lam) / c.root);
    }
    return path;
}

PathSample path_Y(ProfileView prof, const SigmaTable& sigma, double B, std::size_t m) {
    Clock c = make_clock(sigma, B, m);
    const double lo = c.log_B; // window (log B, B^psi], exclusive below
    const double hi = std::exp(std::pow(c.loglog_B, -0.25) * c.log_B);
    if (hi > static_cast<double>(sigma.limit()))
        throw validation_error("path_Y: window top exceeds the sigma table limit");
    const double S_lo = sigma.S(lo);
    // primes at or below e have no clock time; the uniform grid still sees them
    auto pts = grid_with_jumps(c, m, prof.obstructing, std::max(lo, std::exp(1.0)), hi);
    PathSample path;
    path.kind = PathSample::Kind::Y;
    path.B = B;
    path.normalization = c.lam;
    for (auto [t, T] : pts) {
        double Tw = std::min(T, hi);
        double W = 0, M = 0;
        if (Tw > lo) {
            W = count_le(prof.obstructing, Tw) - count_le(prof.obstructing, lo);
            M = sigma.S(Tw) - S_lo;
        }
        path.grid.push_back(t);
        path.values.push_back((W - M) / c.root);
    }
    return path;
}

PathSample path_Z(ProfileView prof, const SigmaTable& sigma, double B, std::size_t m) {
    Clock c = make_clock(sigma, B, m);
    if (static_cast<double>(sigma.limit()) < B)
        throw validation_error("path_Z: sigma table must cover primes up to B");
    const auto S = sigma.S_prefix();
    const std::size_t last = sigma.index_le(B);

    auto value_of_cell = [&](std::size_t idx) {
        double omega = count_le(prof.obstructing, static_cast<double>(sigma.prime(idx)));
        return (omega - S[idx]) / c.root;
    };
    auto cell_at = [&](double t) {
        double target = t * c.lam;
        auto it = std::upper_bound(S.begin(), S.begin() + static_cast<std::ptrdiff_t>(last) + 1,
                                   target);
        std::size_t idx = static_cast<std::size_t>(it - S.begin());
        return std::min(idx, last); // clock times past S(B) stay in the final cell
    };

    // (t, value) pairs; jump cells get exact values by index, bypassing the
    // rounding of t*lam at cell boundaries, and win ties against uniform points
    std::vector<std::pair<double, double>> pts;
    pts.reserve(m + 2 * prof.obstructing.size());
    for (u64 r : prof.obstructing) {
        if (static_cast<double>(r) > B) break;
        std::size_t idx = sigma.index_le(static_cast<double>(r));
        double t_start = (idx == 0 ? 0.0 : S[idx - 1]) / c.lam;
        if (t_start > 1.0) break;
        pts.emplace_back(t_start, value_of_cell(idx));
        if (t_start > 0.0 && idx > 0)
            pts.emplace_back(std::nextafter(t_start, 0.0), value_of_cell(idx - 1));
    }
    for (std::size_t i = 0; i < m; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(m - 1);
        pts.emplace_back(t, value_of_cell(cell_at(t)));
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              pts.end());

    PathSample path;
    path.kind = PathSample::Kind::Z;
    path.B = B;
    path.normalization = c.lam;
    for (auto [t, v] : pts) {
        path.grid.push_back(t);
        path.values.push_back(v);
    }
    return path;
}

double functional_max(const PathSample& path) {
    return *std::max_element(path.values.begin(), path.values.end());
}

double functional_absmax(const PathSample& path) {
    double m = 0;
    for (double v : path.values) m = std::max(m, std::abs(v));
    return m;
}

double functional_l2(ProfileView prof, const SigmaTable& sigma, double B) {
    Clock c = make_clock(sigma, B, 2);
    if (static_cast<double>(sigma.limit()) < B)
        throw validation_error("functional_l2: sigma table must cover primes up to B");
    const auto S = sigma.S_prefix();
    const auto sS = sigma.sS_prefix();
    const auto sSS = sigma.sSS_prefix();
    const std::size_t last = sigma.index_le(B);

    long double sum = 0;
    auto segment = [&](std::size_t a, std::size_t b, unsigned k) { // inclusive [a, b]
        if (a > b || b > last) return;
        double s0 = S[b] - (a ? S[a - 1] : 0.0);
        double s1 = sS[b] - (a ? sS[a - 1] : 0.0);
        double s2 = sSS[b] - (a ? sSS[a - 1] : 0.0);
        double kd = k;
        sum += kd * kd * s0 - 2.0 * kd * s1 + s2;
    };

    std::size_t seg_begin = 0;
    unsigned k = 0;
    for (u64 r : prof.obstructing) {
        if (static_cast<double>(r) > B) break;
        std::size_t idx = sigma.index_le(static_cast<double>(r));
        if (idx > 0) segment(seg_begin, idx - 1, k);
        seg_begin = idx;
        ++k;
    }
    segment(seg_begin, last, k);
    return static_cast<double>(sum) / (c.lam * c.lam);
}

double functional_l2_reference(ProfileView prof, const SigmaTable& sigma, double B) {
    Clock c = make_clock(sigma, B, 2);
    if (static_cast<double>(sigma.limit()) < B)
        throw validation_error("functional_l2_reference: sigma table must cover primes up to B");
    const std::size_t last = sigma.index_le(B);
    long double sum = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i <= last; ++i) {
        double p = static_cast<double>(sigma.prime(i));
        while (j < prof.obstructing.size() && static_cast<double>(prof.obstructing[j]) <= p)
            ++j;
        double dev = static_cast<double>(j) - sigma.S_at(i);
        sum += sigma.sigma(i) * dev * dev;
    }
    return static_cast<double>(sum) / (c.lam * c.lam);
}

std::optional<double> functional_occupation(ProfileView prof, const SigmaTable& sigma) {
    if (prof.height < 16) return std::nullopt;
    const double delta = sigma.family().delta();
    const double limit = static_cast<double>(sigma.limit());
    const double S_lim = sigma.count() ? sigma.S_at(sigma.count() - 1) : 0.0;

    double total = c_hat(prof.obstructing, sigma, limit).value;

    // continuation past the table: S grows like delta * loglog, and within
    // each beyond-table segment the members still form a prefix
    auto S_tilde = [&](double p) {
        return S_lim + delta * (std::log(std::log(p)) - std::log(std::log(limit)));
    };
    double S_prev = S_lim;
    unsigned k = count_le(prof.obstructing, limit);
    for (u64 r : prof.obstructing) {
        if (static_cast<double>(r) <= limit) continue;
        double Sr = S_tilde(static_cast<double>(r));
        total += std::max(0.0, std::min(static_cast<double>(k), Sr) - S_prev);
        S_prev = Sr;
        ++k;
    }
    total += std::max(0.0, static_cast<double>(k) - S_prev);

    return total / (delta * std::log(std::log(prof.height)));
}

double k_tilde(ProfileView prof, const SigmaTable& sigma, double B, double t,
               const std::function<double(double)>& K) {
    Clock c = make_clock(sigma, B, 2);
    if (static_cast<double>(sigma.limit()) < B)
        throw validation_error("k_tilde: sigma table must cover primes up to B");
    if (t < 0 || t > 1) throw validation_error("k_tilde: t must lie in [0,1]");
    double T = threshold_at(c, t);
    std::size_t last = sigma.index_le(T);
    long double sum = 0;
    std::size_t j = 0;
    if (last != SigmaTable::npos) {
        for (std::size_t i = 0; i <= last; ++i) {
            double p = static_cast<double>(sigma.prime(i));
            while (j < prof.obstructing.size() && static_cast<double>(prof.obstructing[j]) <= p)
                ++j;
            sum += sigma.sigma(i) * K((static_cast<double>(j) - sigma.S_at(i)) / c.root);
        }
    }
    return static_cast<double>(sum) / c.lam;
}

void write_path_csv(std::ostream& out, const PathSample& path) {
    out << "t,value\n";
    for (std::size_t i = 0; i < path.grid.size(); ++i)
        out << path.grid[i] << ',' << path.values[i] << '\n';
}

} // namespace obwalks
