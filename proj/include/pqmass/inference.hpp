// Pearson chi-squared comparison of two region-count vectors and the
// chi-squared distribution functions behind its p-values.

#ifndef PQMASS_INFERENCE_HPP_
#define PQMASS_INFERENCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pqmass/core.hpp"

namespace pqmass {

struct Chi2Params {
  std::size_t dof = 1;
};

namespace detail {

inline constexpr int kGammaMaxIter = 100000;
inline constexpr double kGammaEps = 1e-16;

// Regularized lower incomplete gamma P(a, x) by its power series.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double total = term;
  for (int n = 1; n < kGammaMaxIter; ++n) {
    term *= x / (a + n);
    total += term;
    if (std::abs(term) < std::abs(total) * kGammaEps) break;
  }
  return std::min(1.0, total * std::exp(-x + a * std::log(x) - std::lgamma(a)));
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued fraction.
inline double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::min(1.0, std::exp(-x + a * std::log(x) - std::lgamma(a)) * h);
}

}  // namespace detail

// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw ConfigError("gamma_p requires a > 0");
  if (x < 0.0 || std::isnan(x)) throw ConfigError("gamma_p requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_fraction(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw ConfigError("gamma_q requires a > 0");
  if (x < 0.0 || std::isnan(x)) throw ConfigError("gamma_q requires x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_fraction(a, x);
}

inline void require_dof(const Chi2Params& params) {
  if (params.dof < 1) throw ConfigError("chi-squared needs at least one degree of freedom");
}

// Upper tail of the chi-squared distribution: Q(dof/2, x/2).
inline double chi2_sf(double x, Chi2Params params) {
  require_dof(params);
  if (x < 0.0 || std::isnan(x)) throw ConfigError("chi2_sf requires x >= 0");
  return gamma_q(0.5 * static_cast<double>(params.dof), 0.5 * x);
}

inline double chi2_cdf(double x, Chi2Params params) {
  require_dof(params);
  if (x < 0.0 || std::isnan(x)) throw ConfigError("chi2_cdf requires x >= 0");
  return gamma_p(0.5 * static_cast<double>(params.dof), 0.5 * x);
}

inline double chi2_pdf(double x, Chi2Params params) {
  require_dof(params);
  if (x < 0.0) return 0.0;
  const double k = 0.5 * static_cast<double>(params.dof);
  if (x == 0.0) return params.dof == 2 ? 0.5 : (params.dof < 2 ? HUGE_VAL : 0.0);
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

// Smallest x with chi2_sf(x) <= tail (bisection to machine precision).
inline double chi2_isf(double tail, Chi2Params params) {
  require_dof(params);
  if (!(tail > 0.0 && tail < 1.0)) throw ConfigError("chi2_isf requires 0 < tail < 1");
  double lo = 0.0;
  double hi = static_cast<double>(params.dof) + 10.0;
  while (chi2_sf(hi, params) > tail) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_sf(mid, params) > tail ? lo : hi) = mid;
  }
  return hi;
}

inline void require_matching_counts(const RegionCounts& a, const RegionCounts& b) {
  if (a.size() != b.size()) {
    throw ConfigError("region count vectors differ in length: " + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()));
  }
}

// p_j = (k_x,j + k_y,j) / (m + n).
inline std::vector<double> pooled_proportions(const RegionCounts& x, const RegionCounts& y) {
  require_matching_counts(x, y);
  const std::uint64_t total = x.total + y.total;
  if (total == 0) throw ConfigError("pooled proportions need at least one counted point");
  std::vector<double> p(x.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = static_cast<double>(x.counts[j] + y.counts[j]) / static_cast<double>(total);
  }
  return p;
}

struct Chi2Statistic {
  double chi2 = 0.0;
  std::size_t dof = 0;
};

// Pearson chi-squared between the two count vectors with pooled expected
// counts m p_j and n p_j. Regions empty in both sets contribute 0; dof stays
// n_R - 1.
//
// Per region, both Pearson terms collapse to d^2 / (pooled * m * n) with the
// integer d = k_x * (m + n) - m * pooled, so the statistic is exactly zero
// for proportional counts and exactly symmetric in (x, y).
inline Chi2Statistic chi2_statistic(const RegionCounts& x, const RegionCounts& y) {
  require_matching_counts(x, y);
  if (x.size() < 2) throw ConfigError("chi-squared needs at least 2 regions");
  if (x.total == 0 || y.total == 0) throw ConfigError("chi-squared needs m > 0 and n > 0");
  const auto m = static_cast<std::int64_t>(x.total);
  const auto n = static_cast<std::int64_t>(y.total);
  const double mn = static_cast<double>(m) * static_cast<double>(n);
  double chi2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto pooled = static_cast<std::int64_t>(x.counts[j] + y.counts[j]);
    if (pooled == 0) continue;
    const auto kx = static_cast<std::int64_t>(x.counts[j]);
    const double d = static_cast<double>(kx * (m + n) - m * pooled);
    chi2 += d * d / (static_cast<double>(pooled) * mn);
  }
  return {chi2, x.size() - 1};
}

inline double p_value(double chi2, Chi2Params params) { return chi2_sf(chi2, params); }

// Tail probability that flags suspiciously small statistics (memorization).
// MirrorSurvival: survival function at the statistic mirrored around 2 n_R,
// small when chi2 sits far below the mirror point. AsWritten: the CDF at the
// mirrored value, i.e. the literal printed integral.
inline double p_overfit(double chi2, std::size_t num_refs, OverfitMode mode) {
  if (chi2 < 0.0 || std::isnan(chi2)) throw ConfigError("p_overfit requires chi2 >= 0");
  if (num_refs < 2) throw ConfigError("p_overfit requires n_R >= 2");
  const Chi2Params params{num_refs - 1};
  const double mirrored = std::max(2.0 * static_cast<double>(num_refs) - chi2, 0.0);
  if (mode == OverfitMode::MirrorSurvival) return chi2_sf(mirrored, params);
  return std::clamp(chi2_cdf(mirrored, params), 0.0, 1.0);
}

}  // namespace pqmass

#endif  // PQMASS_INFERENCE_HPP_
