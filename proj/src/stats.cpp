#include "tbpsa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tbpsa::stats {

double mean(std::span<const double> xs)
{
    if (xs.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs)
{
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs)
{
    if (xs.empty()) throw std::invalid_argument("standard error of empty sample");
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

double median(std::span<const double> xs)
{
    if (xs.empty()) throw std::invalid_argument("median of empty sample");
    std::vector<double> v(xs.begin(), xs.end());
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

Interval mean_ci95(std::span<const double> xs)
{
    const double m = mean(xs);
    const double half = 1.959963984540054 * standard_error(xs);
    return {m - half, m + half};
}

}  // namespace tbpsa::stats
