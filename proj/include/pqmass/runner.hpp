// Orchestration of PQMass runs: a single tessellation test, repeated
// retessellations (with or without fresh samples) and the permutation test
// on the mean statistic.

#ifndef PQMASS_RUNNER_HPP_
#define PQMASS_RUNNER_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "pqmass/core.hpp"
#include "pqmass/inference.hpp"
#include "pqmass/ks.hpp"
#include "pqmass/metrics.hpp"
#include "pqmass/parallel.hpp"
#include "pqmass/tessellation.hpp"

namespace pqmass {

// A generator must be a pure function of the generator it is handed; it may
// be invoked concurrently from several workers.
using SampleGenerator = std::function<SampleSet(Rng&)>;
using SampleSource = std::variant<SampleSet, SampleGenerator>;

struct KsSummary {
  double statistic = 0.0;
  double p_value = 1.0;
  // Set in Reuse mode: repeats share samples, so they are correlated.
  bool approximate = false;
};

struct PermutationSummary {
  double observed = 0.0;
  std::vector<double> permuted;
  double p_value = 1.0;
};

struct RunReport {
  std::vector<TestResult> results;
  double chi2_mean = 0.0;
  double chi2_std = 0.0;
  RetessellationMode mode = RetessellationMode::Reuse;
  std::size_t num_refs = 0;
  std::optional<KsSummary> ks;
  std::optional<PermutationSummary> permutation;

  std::vector<double> chi2_values() const {
    std::vector<double> v;
    v.reserve(results.size());
    for (const auto& r : results) v.push_back(r.chi2);
    return v;
  }
};

inline constexpr std::size_t kMinRepeatsForKs = 20;

// Reference-selection generator for repeat `repeat` of permutation
// `permutation` (permutation 0 is the unpermuted data).
inline Rng reference_rng(std::uint64_t seed, std::uint64_t repeat, std::uint64_t permutation = 0) {
  return seeded_rng(seed, kReferenceStream, (permutation << 32) | repeat);
}

// Chi-squared test for one tessellation, with both count vectors prepared.
inline TestResult evaluate_counts(RegionCounts counts_x, RegionCounts counts_y,
                                  const RunConfig& config) {
  const Chi2Statistic stat = chi2_statistic(counts_x, counts_y);
  TestResult r;
  r.chi2 = stat.chi2;
  r.dof = stat.dof;
  r.p_value = p_value(stat.chi2, Chi2Params{stat.dof});
  r.p_overfit = p_overfit(stat.chi2, counts_x.size(), config.overfit_mode);
  r.counts_x = std::move(counts_x);
  r.counts_y = std::move(counts_y);
  r.seed_used = config.seed;
  return r;
}

// Select references, quantize what is left of both sets, compare the counts.
inline TestResult pqmass_once(const SampleSet& x, const SampleSet& y, const RunConfig& config,
                              Rng& rng) {
  config.validate();
  const ReferenceSelection sel = select_reference_points(x, y, config.num_refs, config.metric, rng);
  const std::size_t n_regions = sel.tessellation.num_regions();
  const auto labels_x = assign_regions(sel.x_rest, sel.tessellation, config.threads);
  const auto labels_y = assign_regions(sel.y_rest, sel.tessellation, config.threads);
  return evaluate_counts(count_regions(labels_x, n_regions), count_regions(labels_y, n_regions),
                         config);
}

inline RunReport summarize(std::vector<TestResult> results, const RunConfig& config) {
  RunReport report;
  report.results = std::move(results);
  report.mode = config.mode;
  report.num_refs = config.num_refs;
  const auto chi2 = report.chi2_values();
  report.chi2_mean = mean_of(chi2);
  report.chi2_std = stddev_of(chi2);
  if (chi2.size() >= kMinRepeatsForKs) {
    const Chi2Params params{config.num_refs - 1};
    const KsResult ks = ks_test(chi2, [&](double v) { return chi2_cdf(std::max(v, 0.0), params); });
    report.ks = KsSummary{ks.statistic, ks.p_value, config.mode == RetessellationMode::Reuse};
  }
  return report;
}

// Repeats the test `config.repeats` times with fresh reference points. In
// Resample mode both sources must be generators and every repeat draws new
// samples; in Reuse mode both must be fixed sets.
inline RunReport run_retessellations(const SampleSource& source_x, const SampleSource& source_y,
                                     const RunConfig& config) {
  config.validate();
  const bool resample = config.mode == RetessellationMode::Resample;
  const auto expected_index = resample ? 1u : 0u;
  if (source_x.index() != expected_index || source_y.index() != expected_index) {
    throw ConfigError(resample ? "resample mode needs generator sources"
                               : "reuse mode needs fixed sample sets");
  }
  std::vector<TestResult> results(config.repeats);
  parallel_for(config.repeats, config.threads, [&](std::size_t r) {
    Rng ref_rng = reference_rng(config.seed, r);
    if (resample) {
      Rng gx = seeded_rng(config.seed, kSynthStream, 2 * r);
      Rng gy = seeded_rng(config.seed, kSynthStream, 2 * r + 1);
      const SampleSet x = std::get<SampleGenerator>(source_x)(gx);
      const SampleSet y = std::get<SampleGenerator>(source_y)(gy);
      results[r] = pqmass_once(x, y, config, ref_rng);
    } else {
      results[r] = pqmass_once(std::get<SampleSet>(source_x), std::get<SampleSet>(source_y),
                               config, ref_rng);
    }
  });
  return summarize(std::move(results), config);
}

// Add-one estimator (1 + #{permuted >= observed}) / (1 + P); never 0.
inline double permutation_p_value(double observed, std::span<const double> permuted) {
  const auto hits = std::count_if(permuted.begin(), permuted.end(),
                                  [&](double v) { return v >= observed; });
  return (1.0 + static_cast<double>(hits)) / (1.0 + static_cast<double>(permuted.size()));
}

namespace detail {

// All pairwise distances of a pooled sample, stored so that row r holds the
// distance from every pooled point to point r. Entries are computed with the
// same kernel as assign_regions, so lookups reproduce its labels exactly.
class PooledDistances {
 public:
  PooledDistances(const SampleSet& pool, Metric metric, std::size_t threads)
      : n_(pool.size()), values_(pool.size() * pool.size()) {
    const ReferenceKernel kernel(pool, metric);
    parallel_for(n_, threads, [&](std::size_t i) {
      ReferenceKernel::Scratch scratch;
      std::vector<double> row(n_);
      kernel.distances(pool, i, row, scratch);
      for (std::size_t r = 0; r < n_; ++r) values_[r * n_ + i] = row[r];
    });
  }

  std::size_t size() const noexcept { return n_; }
  const double* to_point(std::size_t r) const noexcept { return values_.data() + r * n_; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

// One tessellation of the split (x_ids, y_ids) of the pooled sample, using
// cached distances. Mirrors pqmass_once on the corresponding subsets.
inline double cached_chi2(const PooledDistances& dist, std::span<const std::size_t> x_ids,
                          std::span<const std::size_t> y_ids, std::size_t num_refs, Rng& rng) {
  const ReferenceDraw draw = draw_reference_indices(x_ids.size(), y_ids.size(), num_refs, rng, rng);
  std::vector<std::size_t> refs;
  refs.reserve(num_refs);
  for (std::size_t k : draw.x) refs.push_back(x_ids[k]);
  for (std::size_t k : draw.y) refs.push_back(y_ids[k]);

  const std::size_t n = dist.size();
  std::vector<double> best(dist.to_point(refs[0]), dist.to_point(refs[0]) + n);
  std::vector<Label> label(n, 0);
  for (std::size_t j = 1; j < refs.size(); ++j) {
    const double* d = dist.to_point(refs[j]);
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] < best[i]) {
        best[i] = d[i];
        label[i] = static_cast<Label>(j);
      }
    }
  }

  std::vector<char> is_ref(n, 0);
  for (std::size_t r : refs) is_ref[r] = 1;
  RegionCounts cx, cy;
  cx.counts.assign(num_refs, 0);
  cy.counts.assign(num_refs, 0);
  for (std::size_t i : x_ids) {
    if (is_ref[i]) continue;
    ++cx.counts[label[i]];
    ++cx.total;
  }
  for (std::size_t i : y_ids) {
    if (is_ref[i]) continue;
    ++cy.counts[label[i]];
    ++cy.total;
  }
  return chi2_statistic(cx, cy).chi2;
}

}  // namespace detail

inline constexpr std::size_t kDefaultDistanceCacheBytes = std::size_t{256} << 20;

// Permutation test on the mean chi-squared over `config.repeats`
// retessellations. Each permutation shuffles the pooled m + n points, splits
// them into sizes m and n and recomputes the same mean statistic.
//
// When the pooled distance matrix fits in `cache_bytes` it is computed once
// and shared by all tessellations; results are identical either way.
inline PermutationSummary permutation_test(const SampleSet& x, const SampleSet& y,
                                           const RunConfig& config,
                                           std::size_t cache_bytes = kDefaultDistanceCacheBytes) {
  config.validate();
  if (config.mode != RetessellationMode::Reuse) {
    throw ConfigError("the permutation test runs on fixed samples (reuse mode)");
  }
  if (config.permutations < 1) throw ConfigError("permutation test needs permutations >= 1");
  require_same_shape(x, y);
  require_metric_compatible(x, config.metric);
  require_reference_budget(x.size(), y.size(), config.num_refs);

  const std::size_t m = x.size();
  const std::size_t total = m + y.size();
  const SampleSet pool = SampleSet::concat(x, y);
  const std::size_t cache_entries = total * total;
  std::optional<detail::PooledDistances> cache;
  if (cache_entries <= cache_bytes / sizeof(double)) {
    cache.emplace(pool, config.metric, config.threads);
  }

  auto mean_statistic = [&](std::span<const std::size_t> order, std::uint64_t permutation) {
    const auto x_ids = order.first(m);
    const auto y_ids = order.subspan(m);
    double sum = 0.0;
    if (cache) {
      for (std::size_t r = 0; r < config.repeats; ++r) {
        Rng rng = reference_rng(config.seed, r, permutation);
        sum += detail::cached_chi2(*cache, x_ids, y_ids, config.num_refs, rng);
      }
    } else {
      const SampleSet px = pool.subset(x_ids);
      const SampleSet py = pool.subset(y_ids);
      RunConfig inner = config;
      inner.threads = 1;
      for (std::size_t r = 0; r < config.repeats; ++r) {
        Rng rng = reference_rng(config.seed, r, permutation);
        sum += pqmass_once(px, py, inner, rng).chi2;
      }
    }
    return sum / static_cast<double>(config.repeats);
  };

  std::vector<std::size_t> identity(total);
  std::iota(identity.begin(), identity.end(), std::size_t{0});

  PermutationSummary out;
  out.permuted.resize(config.permutations);
  // Task 0 is the observed statistic; task p + 1 is permutation p.
  std::vector<double> stats(config.permutations + 1);
  parallel_for(stats.size(), config.threads, [&](std::size_t task) {
    if (task == 0) {
      stats[0] = mean_statistic(identity, 0);
      return;
    }
    std::vector<std::size_t> order = identity;
    Rng shuffle_rng = seeded_rng(config.seed, kPermutationStream, task - 1);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    stats[task] = mean_statistic(order, task);
  });
  out.observed = stats[0];
  std::copy(stats.begin() + 1, stats.end(), out.permuted.begin());
  out.p_value = permutation_p_value(out.observed, out.permuted);
  return out;
}

}  // namespace pqmass

#endif  // PQMASS_RUNNER_HPP_
