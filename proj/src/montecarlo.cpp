#include "obwalks/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "obwalks/errors.hpp"
#include "obwalks/parallel.hpp"

namespace obwalks {

using arith::u64;

namespace {

double exp1(SplitMix64& rng) {
    double u;
    do {
        u = rng.next_double();
    } while (u <= 0.0);
    return -std::log1p(-u);
}

} // namespace

BernoulliSampler::BernoulliSampler(const SigmaTable& sigma, double B) {
    if (static_cast<double>(sigma.limit()) < B)
        throw validation_error("bernoulli sampler: sigma table must cover primes up to B");
    long double h = 0;
    for (std::size_t i = 0; i < sigma.count(); ++i) {
        if (static_cast<double>(sigma.prime(i)) > B) break;
        double s = sigma.sigma(i);
        if (s <= 0) continue;
        s = std::min(s, 1.0 - 1e-12);
        h += -std::log1p(-s);
        primes_.push_back(sigma.prime(i));
        hazard_.push_back(static_cast<double>(h));
    }
}

void BernoulliSampler::sample(SplitMix64& rng, std::vector<u64>& out) const {
    out.clear();
    double h = 0;
    for (;;) {
        h += exp1(rng);
        auto it = std::lower_bound(hazard_.begin(), hazard_.end(), h);
        if (it == hazard_.end()) return;
        std::size_t k = static_cast<std::size_t>(it - hazard_.begin());
        out.push_back(primes_[k]);
        h = hazard_[k];
    }
}

SyntheticProfile BernoulliSampler::sample_profile(SplitMix64& rng) const {
    SyntheticProfile sp;
    sample(rng, sp.obstructing);
    return sp;
}

SyntheticProfile sample_bernoulli_profile(const SigmaTable& sigma, double B,
                                          SplitMix64& rng) {
    return BernoulliSampler(sigma, B).sample_profile(rng);
}

WalkPath sample_walk(std::size_t n_steps, std::size_t m_grid, SplitMix64& rng) {
    if (m_grid < 1) throw validation_error("sample_walk: grid needs at least one step");
    if (n_steps < m_grid)
        throw validation_error("sample_walk: n_steps must be at least m_grid");
    WalkPath path;
    path.n_steps = n_steps;
    path.grid.resize(m_grid + 1);
    path.values.resize(m_grid + 1);
    for (std::size_t j = 0; j <= m_grid; ++j)
        path.grid[j] = static_cast<double>(j) / static_cast<double>(m_grid);
    const double root = std::sqrt(static_cast<double>(n_steps));
    BitStepper bits{rng};
    long long W = 0;
    path.values[0] = 0;
    std::size_t j = 1, next = n_steps / m_grid;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        W += bits.step();
        if (k == next) {
            path.values[j] = static_cast<double>(W) / root;
            ++j;
            next = (j * n_steps) / m_grid;
        }
    }
    return path;
}

WalkFunctionals walk_functionals(std::size_t n_steps, SplitMix64& rng) {
    if (n_steps < 1) throw validation_error("walk_functionals: n_steps must be positive");
    BitStepper bits{rng};
    long long W = 0, hi = 0, lo = 0;
    std::size_t positive = 0;
    long double ab = 0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        long long a = W;
        W += bits.step();
        if (W > hi) hi = W;
        if (W < lo) lo = W;
        if (W > 0) ++positive;
        ab += static_cast<long double>(a) * static_cast<long double>(W);
    }
    const double n = static_cast<double>(n_steps);
    const double root = std::sqrt(n);
    WalkFunctionals f;
    f.max = (static_cast<double>(hi) + 1.0) / root;
    f.absmax = (static_cast<double>(std::max(hi, -lo)) + 1.0) / root;
    f.occupation = static_cast<double>(positive) / n;
    f.l2 = static_cast<double>(ab / (static_cast<long double>(n) * n)) + 1.0 / (3.0 * n);
    return f;
}

EmpiricalDistribution mc_functional_distribution(
    const std::function<double(SplitMix64&)>& sample_functional,
    std::size_t n_samples, u64 master_seed, u64 stream_tag, unsigned threads) {
    if (n_samples < 100)
        throw validation_error("mc_functional_distribution: need at least 100 samples");
    std::vector<double> xs(n_samples);
    parallel_for(n_samples, threads ? threads : hardware_threads(), [&](std::size_t i) {
        SplitMix64 rng = derive_stream(master_seed, stream_tag, i);
        xs[i] = sample_functional(rng);
    });
    return make_empirical(std::move(xs));
}

} // namespace obwalks
