#include "obwalks/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "obwalks/errors.hpp"

namespace obwalks {

namespace {

void fill_cum(EmpiricalDistribution& e) {
    e.cum.resize(e.values.size());
    long double acc = 0;
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        acc += e.weight(i);
        e.cum[i] = static_cast<double>(acc);
    }
}

} // namespace

double EmpiricalDistribution::cdf(double x) const {
    auto it = std::upper_bound(values.begin(), values.end(), x);
    if (it == values.begin()) return 0.0;
    return cum[static_cast<std::size_t>(it - values.begin()) - 1] / total_weight();
}

EmpiricalDistribution make_empirical(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    EmpiricalDistribution e;
    e.values = std::move(values);
    fill_cum(e);
    return e;
}

EmpiricalDistribution make_empirical(std::vector<double> values,
                                     std::vector<double> weights) {
    if (weights.size() != values.size())
        throw validation_error("empirical: one weight per value required");
    for (double w : weights)
        if (!(w > 0)) throw validation_error("empirical: weights must be positive");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    EmpiricalDistribution e;
    e.values.reserve(values.size());
    e.weights.reserve(values.size());
    for (std::size_t i : order) {
        e.values.push_back(values[i]);
        e.weights.push_back(weights[i]);
    }
    fill_cum(e);
    return e;
}

EmpiricalDistribution merge(const EmpiricalDistribution& a,
                            const EmpiricalDistribution& b) {
    std::vector<double> values;
    values.reserve(a.size() + b.size());
    values.insert(values.end(), a.values.begin(), a.values.end());
    values.insert(values.end(), b.values.begin(), b.values.end());
    if (a.weights.empty() && b.weights.empty()) return make_empirical(std::move(values));
    std::vector<double> weights;
    weights.reserve(values.size());
    for (std::size_t i = 0; i < a.size(); ++i) weights.push_back(a.weight(i));
    for (std::size_t i = 0; i < b.size(); ++i) weights.push_back(b.weight(i));
    return make_empirical(std::move(values), std::move(weights));
}

double ks_distance(const EmpiricalDistribution& emp,
                   const std::function<double(double)>& cdf) {
    if (emp.size() == 0) throw validation_error("ks_distance: empty sample");
    const double W = emp.total_weight();
    double d = 0, below = 0;
    std::size_t i = 0;
    while (i < emp.size()) {
        double v = emp.values[i];
        while (i < emp.size() && emp.values[i] == v) ++i;
        double above = emp.cum[i - 1] / W;
        double lo = cdf(std::nextafter(v, -std::numeric_limits<double>::infinity()));
        double hi = cdf(v);
        d = std::max({d, std::abs(above - hi), std::abs(below - lo)});
        below = above;
    }
    return d;
}

double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    if (a.size() == 0 || b.size() == 0)
        throw validation_error("ks_distance: empty sample");
    const double WA = a.total_weight(), WB = b.total_weight();
    double d = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        double x = std::numeric_limits<double>::infinity();
        if (i < a.size()) x = a.values[i];
        if (j < b.size()) x = std::min(x, b.values[j]);
        while (i < a.size() && a.values[i] == x) ++i;
        while (j < b.size() && b.values[j] == x) ++j;
        double FA = i ? a.cum[i - 1] / WA : 0.0;
        double FB = j ? b.cum[j - 1] / WB : 0.0;
        d = std::max(d, std::abs(FA - FB));
    }
    return d;
}

std::vector<double> empirical_moments(const EmpiricalDistribution& emp,
                                      unsigned r_max, double mu, double sd) {
    if (r_max < 1 || r_max > 8)
        throw validation_error("empirical_moments: r_max must be in [1, 8]");
    if (emp.size() == 0) throw validation_error("empirical_moments: empty sample");
    if (!(sd > 0)) throw validation_error("empirical_moments: sd must be positive");
    std::vector<long double> acc(r_max, 0.0L);
    for (std::size_t i = 0; i < emp.size(); ++i) {
        long double y = (emp.values[i] - mu) / sd;
        long double p = 1;
        for (unsigned r = 0; r < r_max; ++r) {
            p *= y;
            acc[r] += emp.weight(i) * p;
        }
    }
    std::vector<double> out(r_max);
    for (unsigned r = 0; r < r_max; ++r)
        out[r] = static_cast<double>(acc[r] / emp.total_weight());
    return out;
}

void write_ecdf_csv(std::ostream& out, const EmpiricalDistribution& emp) {
    out << "value,cumulative_probability\n";
    const double W = emp.total_weight();
    std::size_t i = 0;
    while (i < emp.size()) {
        double v = emp.values[i];
        while (i < emp.size() && emp.values[i] == v) ++i;
        out << v << ',' << emp.cum[i - 1] / W << '\n';
    }
}

} // namespace obwalks
