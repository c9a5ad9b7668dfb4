// Baseline two-sample statistics: unbiased squared MMD (linear and RBF
// kernels) and Schilling's unweighted nearest-neighbour statistic T_{k,n}.

#ifndef PQMASS_BASELINES_HPP_
#define PQMASS_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pqmass/core.hpp"
#include "pqmass/metrics.hpp"
#include "pqmass/parallel.hpp"
#include "pqmass/runner.hpp"

namespace pqmass {

enum class KernelType { Linear, Rbf };

struct Kernel {
  KernelType type = KernelType::Rbf;
  // RBF only. Unset means the median heuristic on the pooled sample.
  std::optional<double> bandwidth;
};

inline std::string_view to_string(KernelType k) { return k == KernelType::Linear ? "linear" : "rbf"; }

inline KernelType parse_kernel(std::string_view s) {
  if (s == "linear") return KernelType::Linear;
  if (s == "rbf") return KernelType::Rbf;
  throw ConfigError("unknown kernel '" + std::string(s) + "'");
}

namespace detail {
inline void require_vectors(const SampleSet& x, const SampleSet& y) {
  if (x.modality() != Modality::Vector || y.modality() != Modality::Vector) {
    throw ConfigError("baselines need vector samples");
  }
  require_same_shape(x, y);
}
}  // namespace detail

// Median of all pairwise Euclidean distances in the pooled sample. Falls back
// to 1 when the median is zero (heavily duplicated data).
inline double median_heuristic_bandwidth(const SampleSet& x, const SampleSet& y) {
  detail::require_vectors(x, y);
  const SampleSet pool = SampleSet::concat(x, y);
  const std::size_t n = pool.size();
  if (n < 2) throw ConfigError("median heuristic needs at least 2 points");
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(distance(pool.row(i), pool.row(j), Metric::L2));
  }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double med = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + lower);
  }
  return med > 0.0 ? med : 1.0;
}

// Pooled kernel (Gram) matrix, row-major over concat(x, y).
struct GramMatrix {
  std::size_t n = 0;
  std::vector<double> values;
  double bandwidth = 0.0;  // 0 for the linear kernel

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

inline GramMatrix gram_matrix(const SampleSet& x, const SampleSet& y, const Kernel& kernel,
                              std::size_t threads = 0) {
  detail::require_vectors(x, y);
  const SampleSet pool = SampleSet::concat(x, y);
  GramMatrix g;
  g.n = pool.size();
  g.values.resize(g.n * g.n);
  if (kernel.type == KernelType::Rbf) {
    g.bandwidth = kernel.bandwidth.value_or(0.0);
    if (!kernel.bandwidth) g.bandwidth = median_heuristic_bandwidth(x, y);
    if (!(g.bandwidth > 0.0)) throw ConfigError("RBF bandwidth must be positive");
  }
  const double inv_two_sigma2 = g.bandwidth > 0.0 ? 1.0 / (2.0 * g.bandwidth * g.bandwidth) : 0.0;
  const std::size_t dim = pool.dim();
  parallel_for(g.n, threads, [&](std::size_t i) {
    const double* a = pool.row(i).data();
    for (std::size_t j = 0; j < g.n; ++j) {
      const double* b = pool.row(j).data();
      g.values[i * g.n + j] = kernel.type == KernelType::Linear
                                  ? detail::dot(a, b, dim)
                                  : std::exp(-detail::squared_l2(a, b, dim) * inv_two_sigma2);
    }
  });
  return g;
}

// Unbiased squared MMD for the split where in_x[i] marks the x-points of the
// pooled Gram matrix.
inline double mmd2_from_gram(const GramMatrix& g, const std::vector<char>& in_x) {
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (char c : in_x) m += c ? 1 : 0;
  const std::size_t n = g.n - m;
  if (m < 2 || n < 2) throw ConfigError("MMD needs at least 2 points in each set");
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      if (i == j) continue;
      const double k = g(i, j);
      if (in_x[i] && in_x[j]) {
        sxx += k;
      } else if (!in_x[i] && !in_x[j]) {
        syy += k;
      } else if (in_x[i]) {
        sxy += k;
      }
    }
  }
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return sxx / (md * (md - 1.0)) + syy / (nd * (nd - 1.0)) - 2.0 * sxy / (md * nd);
}

struct MmdResult {
  double value = 0.0;
  double bandwidth = 0.0;
};

inline MmdResult mmd2_detailed(const SampleSet& x, const SampleSet& y, const Kernel& kernel) {
  detail::require_vectors(x, y);
  if (x.size() < 2 || y.size() < 2) throw ConfigError("MMD needs at least 2 points in each set");
  const GramMatrix g = gram_matrix(x, y, kernel);
  std::vector<char> in_x(g.n, 0);
  std::fill(in_x.begin(), in_x.begin() + static_cast<std::ptrdiff_t>(x.size()), 1);
  return {mmd2_from_gram(g, in_x), g.bandwidth};
}

inline double mmd2(const SampleSet& x, const SampleSet& y, const Kernel& kernel) {
  return mmd2_detailed(x, y, kernel).value;
}

// Permutation p-value of the squared MMD (larger is more discrepant).
inline double mmd_permutation_p_value(const SampleSet& x, const SampleSet& y, const Kernel& kernel,
                                      std::size_t permutations, std::uint64_t seed,
                                      std::size_t threads = 0) {
  if (permutations < 1) throw ConfigError("permutations must be >= 1");
  const GramMatrix g = gram_matrix(x, y, kernel, threads);
  std::vector<char> in_x(g.n, 0);
  std::fill(in_x.begin(), in_x.begin() + static_cast<std::ptrdiff_t>(x.size()), 1);
  const double observed = mmd2_from_gram(g, in_x);
  std::vector<double> permuted(permutations);
  parallel_for(permutations, threads, [&](std::size_t p) {
    std::vector<char> labels = in_x;
    Rng rng = seeded_rng(seed, kPermutationStream, p);
    std::shuffle(labels.begin(), labels.end(), rng);
    permuted[p] = mmd2_from_gram(g, labels);
  });
  return permutation_p_value(observed, permuted);
}

struct NnResult {
  double statistic = 0.0;      // T in [0, 1]
  double expected_null = 0.0;  // (m(m-1) + n(n-1)) / ((m+n)(m+n-1))
  std::size_t k = 0;
};

// k nearest neighbours (Euclidean, self excluded, ties to the lower index) of
// every pooled point; row i holds the k neighbour indices of point i.
inline std::vector<std::size_t> nearest_neighbors(const SampleSet& pool, std::size_t k,
                                                  std::size_t threads = 0) {
  const std::size_t n = pool.size();
  if (k < 1 || k >= n) throw ConfigError("k must be between 1 and the pooled size - 1");
  std::vector<std::size_t> out(n * k);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(distance(pool.row(i), pool.row(j), Metric::L2), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t t = 0; t < k; ++t) out[i * k + t] = cand[t].second;
  });
  return out;
}

// Fraction of (point, neighbour) pairs whose members come from the same set.
inline double nn_fraction(const std::vector<std::size_t>& neighbors, std::size_t k,
                          const std::vector<char>& in_x) {
  std::size_t same = 0;
  const std::size_t n = in_x.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) same += in_x[i] == in_x[neighbors[i * k + t]] ? 1 : 0;
  }
  return static_cast<double>(same) / static_cast<double>(n * k);
}

inline double nn_expected_null(std::size_t m, std::size_t n) {
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  const double tot = md + nd;
  return (md * (md - 1.0) + nd * (nd - 1.0)) / (tot * (tot - 1.0));
}

inline void require_nn_k(std::size_t m, std::size_t n, std::size_t k) {
  if (k < 1 || k + 1 >= m + n) {
    throw ConfigError("k must satisfy 1 <= k < m + n - 1 (got k = " + std::to_string(k) + ")");
  }
}

inline NnResult nn_statistic(const SampleSet& x, const SampleSet& y, std::size_t k = 3) {
  detail::require_vectors(x, y);
  require_nn_k(x.size(), y.size(), k);
  const SampleSet pool = SampleSet::concat(x, y);
  const auto neighbors = nearest_neighbors(pool, k);
  std::vector<char> in_x(pool.size(), 0);
  std::fill(in_x.begin(), in_x.begin() + static_cast<std::ptrdiff_t>(x.size()), 1);
  return {nn_fraction(neighbors, k, in_x), nn_expected_null(x.size(), y.size()), k};
}

struct NnPermutationResult {
  NnResult observed;
  std::vector<double> permuted;
  double p_value = 1.0;
};

// Significance of T by shuffling pooled membership. Neighbour lists do not
// depend on membership, so they are computed once.
inline NnPermutationResult nn_permutation_test(const SampleSet& x, const SampleSet& y,
                                               std::size_t k, std::size_t permutations,
                                               std::uint64_t seed, std::size_t threads = 0) {
  detail::require_vectors(x, y);
  require_nn_k(x.size(), y.size(), k);
  if (permutations < 1) throw ConfigError("permutations must be >= 1");
  const SampleSet pool = SampleSet::concat(x, y);
  const auto neighbors = nearest_neighbors(pool, k, threads);
  std::vector<char> in_x(pool.size(), 0);
  std::fill(in_x.begin(), in_x.begin() + static_cast<std::ptrdiff_t>(x.size()), 1);
  NnPermutationResult res;
  res.observed = {nn_fraction(neighbors, k, in_x), nn_expected_null(x.size(), y.size()), k};
  res.permuted.resize(permutations);
  parallel_for(permutations, threads, [&](std::size_t p) {
    std::vector<char> labels = in_x;
    Rng rng = seeded_rng(seed, kPermutationStream, p);
    std::shuffle(labels.begin(), labels.end(), rng);
    res.permuted[p] = nn_fraction(neighbors, k, labels);
  });
  res.p_value = permutation_p_value(res.observed.statistic, res.permuted);
  return res;
}

}  // namespace pqmass

#endif  // PQMASS_BASELINES_HPP_
