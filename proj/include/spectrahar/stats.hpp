#pragma once

#include <span>
#include <vector>

namespace spectrahar::stats {

// Population moments throughout; skewness and excess kurtosis are 0 when the
// variance falls below kDegenerateVariance. Percentiles interpolate linearly
// between order statistics at position q * (n - 1).

inline constexpr double kDegenerateVariance = 1e-12;

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments moments(std::span<const double> x);
double mean(std::span<const double> x);
double variance(std::span<const double> x);
double stddev(std::span<const double> x);
double skewness(std::span<const double> x);
double excess_kurtosis(std::span<const double> x);
double percentile_sorted(std::span<const double> sorted, double q);
double percentile(std::span<const double> x, double q);

}  // namespace spectrahar::stats
