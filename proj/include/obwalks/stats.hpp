#pragma once

#include <cstddef>
#include <functional>
#include <ostream>
#include <vector>

namespace obwalks {

// Weighted empirical distribution. values ascending; empty weights means unit
// weights; cum[i] is the total weight of values[0..i], so cum.back() is the
// total mass. Build through make_empirical so the invariants hold.
struct EmpiricalDistribution {
    std::vector<double> values;
    std::vector<double> weights;
    std::vector<double> cum;

    std::size_t size() const { return values.size(); }
    double total_weight() const { return cum.empty() ? 0.0 : cum.back(); }
    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }

    // P(X <= x), right continuous
    double cdf(double x) const;
};

EmpiricalDistribution make_empirical(std::vector<double> values);
EmpiricalDistribution make_empirical(std::vector<double> values,
                                     std::vector<double> weights);

// Pooled sample; commutative and associative in the distribution it represents.
EmpiricalDistribution merge(const EmpiricalDistribution& a,
                            const EmpiricalDistribution& b);

// sup_x |ECDF(x) - cdf(x)|. The gap below each atom queries the reference just
// left of the value, so step references are compared at the correct limit.
double ks_distance(const EmpiricalDistribution& emp,
                   const std::function<double(double)>& cdf);

// Two sample version, sup over the pooled support.
double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

// (1/W) sum w_i ((x_i - mu)/sd)^r for r = 1..r_max, r_max <= 8. mu and sd are
// the caller's theoretical centering and scale, not sample estimates.
std::vector<double> empirical_moments(const EmpiricalDistribution& emp,
                                      unsigned r_max, double mu = 0.0,
                                      double sd = 1.0);

// rows "value,cumulative_probability", one row per distinct value
void write_ecdf_csv(std::ostream& out, const EmpiricalDistribution& emp);

} // namespace obwalks
