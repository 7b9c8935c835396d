#include "spectrahar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spectrahar::stats {

namespace {

void require_nonempty(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("statistic of an empty sample");
}


}  // namespace

double mean(std::span<const double> x) {
  require_nonempty(x);
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  const double mu = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

Moments moments(std::span<const double> x) {
  Moments m;
  m.mean = mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(x.size());
  m.variance = m2 / n;
  if (m.variance >= kDegenerateVariance) {
    m.skewness = (m3 / n) / std::pow(m.variance, 1.5);
    m.excess_kurtosis = (m4 / n) / (m.variance * m.variance) - 3.0;
  }
  return m;
}

double skewness(std::span<const double> x) { return moments(x).skewness; }

double excess_kurtosis(std::span<const double> x) { return moments(x).excess_kurtosis; }

double percentile_sorted(std::span<const double> sorted, double q) {
  require_nonempty(sorted);
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> x, double q) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return percentile_sorted(s, q);
}

}  // namespace spectrahar::stats
