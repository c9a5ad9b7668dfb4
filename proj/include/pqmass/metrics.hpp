// Pairwise distances between query points and reference points.
//
// The scalar `distance` and the batched kernels share the same arithmetic
// (same reduction order, same zero-norm conventions), so an entry of a
// distance matrix is bit-identical to the corresponding scalar call. The
// Voronoi tie rule relies on this.

#ifndef PQMASS_METRICS_HPP_
#define PQMASS_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pqmass/core.hpp"
#include "pqmass/parallel.hpp"

namespace pqmass {

inline constexpr std::size_t kDefaultBlockRows = 1024;

namespace detail {

inline double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double sum(const double* a, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  for (; i < n; ++i) s0 += a[i];
  return (s0 + s1) + (s2 + s3);
}

inline double squared_l2(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

inline double l1(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += std::abs(a[i] - b[i]);
    s1 += std::abs(a[i + 1] - b[i + 1]);
    s2 += std::abs(a[i + 2] - b[i + 2]);
    s3 += std::abs(a[i + 3] - b[i + 3]);
  }
  for (; i < n; ++i) s0 += std::abs(a[i] - b[i]);
  return (s0 + s1) + (s2 + s3);
}

inline double linf(const double* a, const double* b, std::size_t n) noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Cosine distance from dot products. A zero vector is at distance 0 from
// another zero vector and 1 from anything else.
inline double cosine_from_parts(double ab, double aa, double bb) noexcept {
  if (aa == 0.0 || bb == 0.0) return (aa == 0.0 && bb == 0.0) ? 0.0 : 1.0;
  double denom = std::sqrt(aa * bb);
  if (!std::isfinite(denom) || denom == 0.0) denom = std::sqrt(aa) * std::sqrt(bb);
  return std::clamp(1.0 - ab / denom, 0.0, 2.0);
}

inline void center(const double* a, std::size_t n, double* out) noexcept {
  const double mu = sum(a, n) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - mu;
}

// Two-row Levenshtein with unit costs; memory is O(min(|a|, |b|)).
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b,
                               std::vector<std::size_t>& prev, std::vector<std::size_t>& cur) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t nb = b.size();
  prev.resize(nb + 1);
  cur.resize(nb + 1);
  for (std::size_t j = 0; j <= nb; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    const char32_t ca = a[i - 1];
    for (std::size_t j = 1; j <= nb; ++j) {
      const std::size_t sub = prev[j - 1] + (ca == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[nb];
}

inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev, cur;
  return levenshtein(a, b, prev, cur);
}

}  // namespace detail

// Distance between two real vectors.
inline double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (metric == Metric::Edit) throw ConfigError("edit distance requires sequence samples");
  if (a.size() != b.size()) {
    throw ConfigError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
  const std::size_t n = a.size();
  switch (metric) {
    case Metric::L1: return detail::l1(a.data(), b.data(), n);
    case Metric::L2: return std::sqrt(detail::squared_l2(a.data(), b.data(), n));
    case Metric::LInf: return detail::linf(a.data(), b.data(), n);
    case Metric::Cosine:
      return detail::cosine_from_parts(detail::dot(a.data(), b.data(), n),
                                       detail::dot(a.data(), a.data(), n),
                                       detail::dot(b.data(), b.data(), n));
    case Metric::Correlation: {
      if (n < 2) throw ConfigError("correlation distance requires dim >= 2");
      std::vector<double> ca(n), cb(n);
      detail::center(a.data(), n, ca.data());
      detail::center(b.data(), n, cb.data());
      return detail::cosine_from_parts(detail::dot(ca.data(), cb.data(), n),
                                       detail::dot(ca.data(), ca.data(), n),
                                       detail::dot(cb.data(), cb.data(), n));
    }
    case Metric::Edit: break;
  }
  throw ConfigError("unsupported metric");
}

// Levenshtein distance between two sequences.
inline double distance(std::u32string_view a, std::u32string_view b, Metric metric) {
  if (metric != Metric::Edit) {
    throw ConfigError("metric '" + std::string(to_string(metric)) +
                      "' cannot be used on sequence samples");
  }
  return static_cast<double>(detail::levenshtein(a, b));
}

inline double distance(const SampleSet& a, std::size_t i, const SampleSet& b, std::size_t j,
                       Metric metric) {
  require_same_shape(a, b);
  require_metric_compatible(a, metric);
  if (a.modality() == Modality::Sequence) return distance(a.sequence(i), b.sequence(j), metric);
  return distance(a.row(i), b.row(j), metric);
}

// Distances from arbitrary query points to a fixed set of reference points,
// with per-reference quantities (norms, centred copies) computed once.
class ReferenceKernel {
 public:
  ReferenceKernel(const SampleSet& refs, Metric metric) : refs_(&refs), metric_(metric) {
    require_metric_compatible(refs, metric);
    if (metric == Metric::Correlation && refs.dim() < 2) {
      throw ConfigError("correlation distance requires dim >= 2");
    }
    const std::size_t dim = refs.dim();
    if (metric == Metric::Cosine || metric == Metric::Correlation) {
      prepared_.resize(refs.size() * dim);
      norms_.resize(refs.size());
      for (std::size_t j = 0; j < refs.size(); ++j) {
        double* dst = prepared_.data() + j * dim;
        const auto r = refs.row(j);
        if (metric == Metric::Correlation) {
          detail::center(r.data(), dim, dst);
        } else {
          std::copy(r.begin(), r.end(), dst);
        }
        norms_[j] = detail::dot(dst, dst, dim);
      }
    }
  }

  std::size_t size() const noexcept { return refs_->size(); }
  Metric metric() const noexcept { return metric_; }

  // Per-thread working memory.
  struct Scratch {
    std::vector<double> query;
    std::vector<std::size_t> prev, cur;
  };

  // out[j] = distance(queries[i], refs[j]) for every reference j.
  void distances(const SampleSet& queries, std::size_t i, std::span<double> out,
                 Scratch& scratch) const {
    const std::size_t n_refs = refs_->size();
    if (metric_ == Metric::Edit) {
      const std::u32string& q = queries.sequence(i);
      for (std::size_t j = 0; j < n_refs; ++j) {
        out[j] = static_cast<double>(
            detail::levenshtein(q, refs_->sequence(j), scratch.prev, scratch.cur));
      }
      return;
    }
    const std::size_t dim = refs_->dim();
    const double* q = queries.row(i).data();
    switch (metric_) {
      case Metric::L1:
        for (std::size_t j = 0; j < n_refs; ++j) out[j] = detail::l1(q, refs_->row(j).data(), dim);
        return;
      case Metric::L2:
        for (std::size_t j = 0; j < n_refs; ++j) {
          out[j] = std::sqrt(detail::squared_l2(q, refs_->row(j).data(), dim));
        }
        return;
      case Metric::LInf:
        for (std::size_t j = 0; j < n_refs; ++j) {
          out[j] = detail::linf(q, refs_->row(j).data(), dim);
        }
        return;
      case Metric::Cosine:
      case Metric::Correlation: {
        const double* qp = q;
        if (metric_ == Metric::Correlation) {
          scratch.query.resize(dim);
          detail::center(q, dim, scratch.query.data());
          qp = scratch.query.data();
        }
        const double qq = detail::dot(qp, qp, dim);
        for (std::size_t j = 0; j < n_refs; ++j) {
          const double* r = prepared_.data() + j * dim;
          out[j] = detail::cosine_from_parts(detail::dot(qp, r, dim), qq, norms_[j]);
        }
        return;
      }
      case Metric::Edit: break;
    }
  }

 private:
  const SampleSet* refs_;
  Metric metric_;
  std::vector<double> prepared_;
  std::vector<double> norms_;
};

// Row-major n_queries x n_refs matrix.
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

// Calls fn(begin, end, dists) for consecutive blocks of at most `block_rows`
// queries, where dists is the (end - begin) x n_refs block of distances.
// Blocks are processed in parallel; fn must only touch state owned by its
// block.
template <class Fn>
void for_each_distance_block(const SampleSet& queries, const SampleSet& refs, Metric metric,
                             Fn&& fn, std::size_t threads = 0,
                             std::size_t block_rows = kDefaultBlockRows) {
  require_same_shape(queries, refs);
  require_metric_compatible(queries, metric);
  if (block_rows == 0) block_rows = kDefaultBlockRows;
  const ReferenceKernel kernel(refs, metric);
  const std::size_t n = queries.size();
  const std::size_t n_refs = refs.size();
  const std::size_t n_blocks = (n + block_rows - 1) / block_rows;
  parallel_for(n_blocks, threads, [&](std::size_t b) {
    const std::size_t begin = b * block_rows;
    const std::size_t end = std::min(n, begin + block_rows);
    std::vector<double> dists((end - begin) * n_refs);
    ReferenceKernel::Scratch scratch;
    for (std::size_t i = begin; i < end; ++i) {
      kernel.distances(queries, i,
                       std::span<double>(dists.data() + (i - begin) * n_refs, n_refs), scratch);
    }
    fn(begin, end, std::span<const double>(dists));
  });
}

inline DistanceMatrix distance_matrix(const SampleSet& queries, const SampleSet& refs,
                                      Metric metric, std::size_t threads = 0) {
  DistanceMatrix m;
  m.rows = queries.size();
  m.cols = refs.size();
  m.values.resize(m.rows * m.cols);
  for_each_distance_block(
      queries, refs, metric,
      [&](std::size_t begin, std::size_t, std::span<const double> block) {
        std::copy(block.begin(), block.end(),
                  m.values.begin() + static_cast<std::ptrdiff_t>(begin * m.cols));
      },
      threads);
  return m;
}

}  // namespace pqmass

#endif  // PQMASS_METRICS_HPP_
