// One-sample Kolmogorov-Smirnov goodness-of-fit test.

#ifndef PQMASS_KS_HPP_
#define PQMASS_KS_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "pqmass/core.hpp"

namespace pqmass {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// P(K > lambda) for the limiting Kolmogorov distribution. Uses the
// alternating tail series for large lambda and the Jacobi-transformed series
// for small lambda; both are summed to convergence.
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const double w = pi2 / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * w);
      s += term;
      if (term < 1e-17 * s) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

// Kolmogorov-Smirnov test of `sample` against a continuous reference CDF.
// D = sup |F_n - F|; p from the asymptotic distribution evaluated at
// (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D.
template <class Cdf>
KsResult ks_test(std::span<const double> sample, Cdf&& reference_cdf) {
  if (sample.empty()) throw ConfigError("ks_test needs a non-empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = reference_cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)};
}

}  // namespace pqmass

#endif  // PQMASS_KS_HPP_
