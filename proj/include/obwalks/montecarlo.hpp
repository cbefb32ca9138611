#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "obwalks/fibration.hpp"
#include "obwalks/rng.hpp"
#include "obwalks/stats.hpp"

namespace obwalks {

// Independent Bernoulli(sigma_p) surrogate for the obstruction indicators.
struct SyntheticProfile {
    std::vector<arith::u64> obstructing;
    arith::u64 seed = 0;
};

// One random bit per +-1 step, 64 steps per generator word.
struct BitStepper {
    SplitMix64& rng;
    arith::u64 buf = 0;
    unsigned left = 0;

    int step() {
        if (left == 0) {
            buf = rng.next();
            left = 64;
        }
        int s = (buf & 1) ? 1 : -1;
        buf >>= 1;
        --left;
        return s;
    }
};

// Samples {p <= B : sigma_p > 0} by inverting the cumulative hazard
// H_i = sum_{j <= i} -log(1 - sigma_j): an Exp(1) arrival stream on the hazard
// axis hits interval i with probability sigma_i, and jumping to the interval
// end after a hit keeps later inclusions independent (memorylessness).
// Cost O(omega * log pi(B)) per draw instead of O(pi(B)).
class BernoulliSampler {
public:
    // sigma_p = 1 is capped at 1 - 1e-12 to keep the hazard finite
    BernoulliSampler(const SigmaTable& sigma, double B);

    void sample(SplitMix64& rng, std::vector<arith::u64>& out) const;
    SyntheticProfile sample_profile(SplitMix64& rng) const;

    std::size_t covered_count() const { return primes_.size(); }

private:
    std::vector<arith::u64> primes_; // positive-rate primes <= B
    std::vector<double> hazard_;     // strictly increasing prefix
};

SyntheticProfile sample_bernoulli_profile(const SigmaTable& sigma, double B,
                                          SplitMix64& rng);

// Simple +-1 walk scaled by 1/sqrt(n), value(0) = 0, read on a uniform grid
// of m_grid + 1 times.
struct WalkPath {
    std::size_t n_steps = 0;
    std::vector<double> grid;
    std::vector<double> values;
};

WalkPath sample_walk(std::size_t n_steps, std::size_t m_grid, SplitMix64& rng);

// Extremes and integrals of one walk at full step resolution. max and absmax
// carry a +1 lattice shift: a +-1 walk exceeds level a exactly when it reaches
// a + 1 with no overshoot, so the matching continuum barrier sits at a + 1.
// occupation counts steps strictly above 0; l2 integrates the squared linear
// interpolation exactly (per step (a^2 + ab + b^2)/3 = ab + 1/3).
struct WalkFunctionals {
    double max = 0;
    double absmax = 0;
    double occupation = 0;
    double l2 = 0;
};

WalkFunctionals walk_functionals(std::size_t n_steps, SplitMix64& rng);

// ECDF of a scalar functional over n i.i.d. samples. Sample i always draws
// from derive_stream(master_seed, stream_tag, i), so the result is independent
// of thread count and schedule. sample_functional must be callable from
// several threads at once.
EmpiricalDistribution mc_functional_distribution(
    const std::function<double(SplitMix64&)>& sample_functional,
    std::size_t n_samples, arith::u64 master_seed, arith::u64 stream_tag,
    unsigned threads = 0);

} // namespace obwalks
