#pragma once

#include <span>

namespace tbpsa::stats {

double mean(std::span<const double> xs);

/// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> xs);

/// Standard error of the mean.
double standard_error(std::span<const double> xs);

/// Median of a copy of xs. Empty input is an error.
double median(std::span<const double> xs);

struct Interval {
    double low;
    double high;
    [[nodiscard]] bool contains(double v) const { return low <= v && v <= high; }
};

/// Normal-approximation 95% interval for the mean.
Interval mean_ci95(std::span<const double> xs);

}  // namespace tbpsa::stats
