// Reference-point selection and Voronoi quantization of sample sets into
// region counts.

#ifndef PQMASS_TESSELLATION_HPP_
#define PQMASS_TESSELLATION_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pqmass/core.hpp"
#include "pqmass/metrics.hpp"

namespace pqmass {

// Ordered reference points z_1..z_nR and the metric defining their cells.
class Tessellation {
 public:
  Tessellation(SampleSet refs, Metric metric) : refs_(std::move(refs)), metric_(metric) {
    if (refs_.size() < 2) throw ConfigError("a tessellation needs at least 2 reference points");
    require_metric_compatible(refs_, metric_);
  }

  const SampleSet& refs() const noexcept { return refs_; }
  Metric metric() const noexcept { return metric_; }
  std::size_t num_regions() const noexcept { return refs_.size(); }

 private:
  SampleSet refs_;
  Metric metric_;
};

inline std::size_t refs_from_x(std::size_t num_refs) noexcept { return num_refs / 2; }
inline std::size_t refs_from_y(std::size_t num_refs) noexcept { return num_refs - num_refs / 2; }

// k distinct indices from [0, pool) in draw order (partial Fisher-Yates).
inline std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t k,
                                                           Rng& rng) {
  if (k > pool) throw ConfigError("cannot draw more indices than the pool holds");
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

struct ReferenceDraw {
  std::vector<std::size_t> x;  // floor(n_R / 2) indices into the x pool
  std::vector<std::size_t> y;  // ceil(n_R / 2) indices into the y pool
};

inline void require_reference_budget(std::size_t m, std::size_t n, std::size_t num_refs) {
  if (num_refs < 2) throw ConfigError("number of reference points must be >= 2");
  if (m <= refs_from_x(num_refs) || n <= refs_from_y(num_refs)) {
    throw ConfigError("insufficient samples for " + std::to_string(num_refs) +
                      " reference points: need more than " +
                      std::to_string(refs_from_x(num_refs)) + " x-samples and " +
                      std::to_string(refs_from_y(num_refs)) + " y-samples, got " +
                      std::to_string(m) + " and " + std::to_string(n));
  }
}

// x-block indices come from rng_x, y-block indices from rng_y. Passing the
// same generator twice draws the x block first.
inline ReferenceDraw draw_reference_indices(std::size_t m, std::size_t n, std::size_t num_refs,
                                            Rng& rng_x, Rng& rng_y) {
  require_reference_budget(m, n, num_refs);
  ReferenceDraw draw;
  draw.x = sample_without_replacement(m, refs_from_x(num_refs), rng_x);
  draw.y = sample_without_replacement(n, refs_from_y(num_refs), rng_y);
  return draw;
}

struct ReferenceSelection {
  Tessellation tessellation;
  SampleSet x_rest;
  SampleSet y_rest;
};

// Draws floor(n_R/2) references from x and ceil(n_R/2) from y, without
// replacement, and removes them (by index) from their pools. References are
// ordered x-block first, each block in draw order.
inline ReferenceSelection select_reference_points(const SampleSet& x, const SampleSet& y,
                                                  std::size_t num_refs, Metric metric,
                                                  Rng& rng_x, Rng& rng_y) {
  require_same_shape(x, y);
  require_metric_compatible(x, metric);
  const ReferenceDraw draw = draw_reference_indices(x.size(), y.size(), num_refs, rng_x, rng_y);
  SampleSet refs = SampleSet::concat(x.subset(draw.x), y.subset(draw.y));
  return ReferenceSelection{Tessellation(std::move(refs), metric), x.without(draw.x),
                            y.without(draw.y)};
}

inline ReferenceSelection select_reference_points(const SampleSet& x, const SampleSet& y,
                                                  std::size_t num_refs, Metric metric, Rng& rng) {
  return select_reference_points(x, y, num_refs, metric, rng, rng);
}

using Label = std::uint32_t;

// label_i = smallest j minimizing D(point_i, z_j). Distances are compared
// exactly; equal distances resolve to the lower reference index.
inline std::vector<Label> assign_regions(const SampleSet& points, const Tessellation& tess,
                                         std::size_t threads = 0) {
  require_same_shape(points, tess.refs());
  std::vector<Label> labels(points.size());
  const std::size_t n_refs = tess.num_regions();
  for_each_distance_block(
      points, tess.refs(), tess.metric(),
      [&](std::size_t begin, std::size_t end, std::span<const double> block) {
        for (std::size_t i = begin; i < end; ++i) {
          const double* d = block.data() + (i - begin) * n_refs;
          std::size_t best = 0;
          for (std::size_t j = 1; j < n_refs; ++j) {
            if (d[j] < d[best]) best = j;
          }
          labels[i] = static_cast<Label>(best);
        }
      },
      threads);
  return labels;
}

inline RegionCounts count_regions(std::span<const Label> labels, std::size_t num_regions) {
  RegionCounts rc;
  rc.counts.assign(num_regions, 0);
  for (Label l : labels) {
    if (l >= num_regions) {
      throw std::out_of_range("region label " + std::to_string(l) + " outside 0.." +
                              std::to_string(num_regions - 1));
    }
    ++rc.counts[l];
  }
  rc.total = labels.size();
  return rc;
}

}  // namespace pqmass

#endif  // PQMASS_TESSELLATION_HPP_
