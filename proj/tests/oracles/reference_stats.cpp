#include "oracles/reference_stats.hpp"

#include <cmath>

namespace gapbridge::oracle {

Moments moments(std::span<const double> xs) {
  const auto n = static_cast<long double>(xs.size());
  long double sum = 0.0L;
  for (double x : xs) sum += x;
  const long double mean = sum / n;
  long double m2 = 0.0L;
  for (double x : xs) m2 += (x - mean) * (x - mean);
  return {static_cast<double>(mean), static_cast<double>(m2 / n)};
}

double skewness(std::span<const double> xs) {
  const auto n = static_cast<long double>(xs.size());
  long double sum = 0.0L;
  for (double x : xs) sum += x;
  const long double mean = sum / n;
  long double m2 = 0.0L, m3 = 0.0L;
  for (double x : xs) {
    const long double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return static_cast<double>(m3 / std::pow(m2, 1.5L));
}

}  // namespace gapbridge::oracle
