#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "pqmass/inference.hpp"
#include "pqmass/synth.hpp"
#include "pqmass/tessellation.hpp"

using namespace pqmass;

namespace {

SampleSet gaussian_set(std::size_t n, std::size_t dim, Rng& rng, double shift = 0.0) {
  std::normal_distribution<double> normal;
  std::vector<double> v(n * dim);
  for (double& x : v) x = normal(rng) + shift;
  return SampleSet::vectors(std::move(v), dim);
}

std::vector<Label> brute_force_labels(const SampleSet& pts, const SampleSet& refs, Metric m) {
  std::vector<Label> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = INFINITY;
    for (std::size_t j = 0; j < refs.size(); ++j) {
      const double d = distance(pts, i, refs, j, m);
      if (d < best) {
        best = d;
        out[i] = static_cast<Label>(j);
      }
    }
  }
  return out;
}

}  // namespace

TEST(SelectReferences, SplitFloorCeil) {
  EXPECT_EQ(refs_from_x(2), 1u);
  EXPECT_EQ(refs_from_y(2), 1u);
  EXPECT_EQ(refs_from_x(5), 2u);
  EXPECT_EQ(refs_from_y(5), 3u);
}

TEST(SelectReferences, RemovalArithmetic) {
  Rng rng = seeded_rng(1, 0);
  Rng data = seeded_rng(1, 2);
  const auto x = gaussian_set(100, 2, data), y = gaussian_set(100, 2, data);
  const auto sel = select_reference_points(x, y, 100, Metric::L2, rng);
  EXPECT_EQ(sel.x_rest.size(), 50u);
  EXPECT_EQ(sel.y_rest.size(), 50u);
  EXPECT_EQ(sel.tessellation.num_regions(), 100u);
}

TEST(SelectReferences, OrderAndRemovalByIndex) {
  // Values encode their own index, so refs and leftovers can be traced.
  std::vector<double> xv(10), yv(12);
  std::iota(xv.begin(), xv.end(), 0.0);
  std::iota(yv.begin(), yv.end(), 100.0);
  const auto x = SampleSet::vectors(xv, 1), y = SampleSet::vectors(yv, 1);
  Rng a = seeded_rng(4, 0);
  const auto sel = select_reference_points(x, y, 5, Metric::L1, a);
  Rng b = seeded_rng(4, 0);
  const auto draw = draw_reference_indices(10, 12, 5, b, b);
  ASSERT_EQ(draw.x.size(), 2u);
  ASSERT_EQ(draw.y.size(), 3u);
  const auto& refs = sel.tessellation.refs();
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(refs.row(k)[0], static_cast<double>(draw.x[k]));
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(refs.row(2 + k)[0], 100.0 + static_cast<double>(draw.y[k]));
  }
  std::set<double> seen;
  for (std::size_t i = 0; i < sel.x_rest.size(); ++i) seen.insert(sel.x_rest.row(i)[0]);
  for (std::size_t k = 0; k < 2; ++k) seen.insert(refs.row(k)[0]);
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(sel.y_rest.size(), 9u);
}

TEST(SelectReferences, DrawsWithoutReplacement) {
  Rng rng = seeded_rng(5, 0);
  for (int t = 0; t < 100; ++t) {
    const auto idx = sample_without_replacement(20, 20, rng);
    std::set<std::size_t> s(idx.begin(), idx.end());
    EXPECT_EQ(s.size(), 20u);
    EXPECT_EQ(*s.rbegin(), 19u);
  }
  EXPECT_THROW(sample_without_replacement(3, 4, rng), ConfigError);
}

TEST(SelectReferences, InsufficientSamples) {
  Rng rng = seeded_rng(1, 0);
  const auto x = SampleSet::vectors({1, 2, 3}, 1);
  const auto y = SampleSet::vectors({1, 2, 3, 4}, 1);
  // n_R = 6 needs m > 3 and n > 3.
  EXPECT_THROW(select_reference_points(x, y, 6, Metric::L2, rng), ConfigError);
  EXPECT_NO_THROW(select_reference_points(x, y, 5, Metric::L2, rng));
  EXPECT_THROW(select_reference_points(x, y, 1, Metric::L2, rng), ConfigError);
}

TEST(SelectReferences, ModalityChecked) {
  Rng rng = seeded_rng(1, 0);
  const auto x = SampleSet::vectors({1, 2, 3}, 1);
  EXPECT_THROW(select_reference_points(x, x, 2, Metric::Edit, rng), ConfigError);
  const auto s = SampleSet::sequences({U"a", U"b", U"c"});
  EXPECT_THROW(select_reference_points(x, s, 2, Metric::L2, rng), ConfigError);
}

TEST(Tessellation, NeedsTwoRefs) {
  EXPECT_THROW(Tessellation(SampleSet::vectors({0.0}, 1), Metric::L2), ConfigError);
}

TEST(AssignRegions, TieGoesToLowerIndex) {
  const Tessellation tess(SampleSet::vectors({0.0, 2.0}, 1), Metric::L2);
  EXPECT_EQ(assign_regions(SampleSet::vectors({1.0}, 1), tess), std::vector<Label>{0});
  EXPECT_EQ(assign_regions(SampleSet::vectors({1.9}, 1), tess), std::vector<Label>{1});
  // Duplicate references: the later copy never wins.
  const Tessellation dup(SampleSet::vectors({5.0, 5.0, 0.0}, 1), Metric::L1);
  EXPECT_EQ(assign_regions(SampleSet::vectors({5.0, 4.0, 0.1}, 1), dup),
            (std::vector<Label>{0, 0, 2}));
}

TEST(AssignRegions, MatchesExhaustiveArgmin2D) {
  Rng rng = seeded_rng(2, 9);
  const auto pts = gaussian_set(50, 2, rng), refs = gaussian_set(7, 2, rng);
  const Tessellation tess(refs, Metric::L2);
  EXPECT_EQ(assign_regions(pts, tess), brute_force_labels(pts, refs, Metric::L2));
}

TEST(AssignRegions, MatchesExhaustiveArgminAllMetrics) {
  Rng rng = seeded_rng(3, 9);
  std::uniform_int_distribution<std::size_t> dim_pick(2, 12), n_pick(1, 60), r_pick(2, 15);
  std::uniform_int_distribution<int> grid(-2, 2);
  for (int t = 0; t < 60; ++t) {
    const std::size_t dim = dim_pick(rng);
    // Coarse integer grids make exact distance ties common.
    auto lattice = [&](std::size_t n) {
      std::vector<double> v(n * dim);
      for (double& x : v) x = grid(rng);
      return SampleSet::vectors(std::move(v), dim);
    };
    const auto pts = t % 2 ? lattice(n_pick(rng)) : gaussian_set(n_pick(rng), dim, rng);
    const auto refs = t % 2 ? lattice(r_pick(rng)) : gaussian_set(r_pick(rng), dim, rng);
    for (Metric m : {Metric::L1, Metric::L2, Metric::LInf, Metric::Cosine, Metric::Correlation}) {
      const Tessellation tess(refs, m);
      EXPECT_EQ(assign_regions(pts, tess, 3), brute_force_labels(pts, refs, m)) << to_string(m);
    }
  }
  for (int t = 0; t < 30; ++t) {
    std::uniform_int_distribution<int> len(0, 5), sym(0, 2);
    auto words = [&](std::size_t n) {
      std::vector<std::u32string> v(n);
      for (auto& w : v) {
        w.resize(static_cast<std::size_t>(len(rng)));
        for (auto& c : w) c = static_cast<char32_t>(U'a' + sym(rng));
      }
      return SampleSet::sequences(std::move(v));
    };
    const auto pts = words(40), refs = words(6);
    EXPECT_EQ(assign_regions(pts, Tessellation(refs, Metric::Edit)),
              brute_force_labels(pts, refs, Metric::Edit));
  }
}

TEST(AssignRegions, PartitionProperty) {
  Rng rng = seeded_rng(4, 9);
  const auto pts = gaussian_set(500, 3, rng), refs = gaussian_set(11, 3, rng);
  const auto labels = assign_regions(pts, Tessellation(refs, Metric::LInf));
  ASSERT_EQ(labels.size(), pts.size());
  for (Label l : labels) EXPECT_LT(l, 11u);
  const auto counts = count_regions(labels, 11);
  EXPECT_EQ(std::accumulate(counts.counts.begin(), counts.counts.end(), std::uint64_t{0}), 500u);
}

TEST(AssignRegions, IsometryEquivariance) {
  Rng rng = seeded_rng(5, 9);
  const std::size_t d = 5;
  const auto pts = gaussian_set(300, d, rng), refs = gaussian_set(9, d, rng);
  const Eigen::MatrixXd q = random_orthonormal(d, rng);
  const Eigen::VectorXd shift = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), 3.0);
  auto move = [&](const SampleSet& s) {
    std::vector<double> v(s.data().begin(), s.data().end());
    for (std::size_t i = 0; i < s.size(); ++i) {
      Eigen::Map<Eigen::VectorXd> p(v.data() + i * d, static_cast<Eigen::Index>(d));
      p = (q * p + shift).eval();
    }
    return SampleSet::vectors(std::move(v), d);
  };
  EXPECT_EQ(assign_regions(move(pts), Tessellation(move(refs), Metric::L2)),
            assign_regions(pts, Tessellation(refs, Metric::L2)));
}

TEST(AssignRegions, SameLabelsForAnyThreadCount) {
  Rng rng = seeded_rng(6, 9);
  const auto pts = gaussian_set(5000, 4, rng), refs = gaussian_set(30, 4, rng);
  const Tessellation tess(refs, Metric::L2);
  const auto one = assign_regions(pts, tess, 1);
  EXPECT_EQ(assign_regions(pts, tess, 4), one);
  EXPECT_EQ(assign_regions(pts, tess, 8), one);
}

TEST(AssignRegions, RejectsMismatch) {
  const Tessellation tess(SampleSet::vectors({0, 0, 1, 1}, 2), Metric::L2);
  EXPECT_THROW(assign_regions(SampleSet::vectors({0, 0, 0}, 3), tess), ConfigError);
}

TEST(CountRegions, Examples) {
  const std::vector<Label> labels{0, 0, 1, 0};
  const auto c = count_regions(labels, 2);
  EXPECT_EQ(c.counts, (std::vector<std::uint64_t>{3, 1}));
  EXPECT_EQ(c.total, 4u);
  const auto e = count_regions(std::vector<Label>{}, 3);
  EXPECT_EQ(e.counts, (std::vector<std::uint64_t>{0, 0, 0}));
  EXPECT_EQ(e.total, 0u);
  EXPECT_THROW(count_regions(std::vector<Label>{2}, 2), std::out_of_range);
}

TEST(CountRegions, MatchesHistogramOracle) {
  Rng rng = seeded_rng(7, 9);
  std::uniform_int_distribution<Label> pick(0, 12);
  std::vector<Label> labels(10000);
  for (auto& l : labels) l = pick(rng);
  std::vector<std::uint64_t> hist(13, 0);
  for (Label l : labels) hist[l]++;
  const auto c = count_regions(labels, 13);
  EXPECT_EQ(c.counts, hist);
  EXPECT_EQ(c.total, labels.size());
}

// Cells of a fixed 1-D tessellation are intervals bounded by midpoints, so
// their masses under N(0,1) are known in closed form.
TEST(Consistency, EmpiricalProportionsMatchCellMass) {
  const std::vector<double> refs{-1.5, -0.4, 0.0, 0.3, 1.1, 2.5};
  const Tessellation tess(SampleSet::vectors(refs, 1), Metric::L2);
  std::vector<double> mass(refs.size());
  for (std::size_t j = 0; j < refs.size(); ++j) {
    const double lo = j == 0 ? -INFINITY : 0.5 * (refs[j - 1] + refs[j]);
    const double hi = j + 1 == refs.size() ? INFINITY : 0.5 * (refs[j] + refs[j + 1]);
    mass[j] = oracle::normal_cdf(hi) - oracle::normal_cdf(lo);
  }
  const std::size_t n = 10000;
  int passes = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    Rng rng = seeded_rng(static_cast<std::uint64_t>(s), 2);
    const auto c = count_regions(assign_regions(gaussian_set(n, 1, rng), tess), refs.size());
    bool ok = true;
    for (std::size_t j = 0; j < refs.size(); ++j) {
      const double se = std::sqrt(mass[j] * (1 - mass[j]) / n);
      ok = ok && std::abs(static_cast<double>(c.counts[j]) / n - mass[j]) <= 4 * se;
    }
    passes += ok;
  }
  EXPECT_GE(passes, 99);
}

// Rejection rate against a fixed alternative grows with the number of cells.
TEST(Consistency, RejectionRateTrendInNumRefs) {
  const std::vector<std::size_t> nrs{2, 10, 50};
  std::vector<int> rejections(nrs.size(), 0);
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng data = seeded_rng(s, 2, 1);
    const auto x = gaussian_set(20000, 2, data);
    const auto y = gaussian_set(20000, 2, data, 0.08);
    for (std::size_t k = 0; k < nrs.size(); ++k) {
      Rng rng = seeded_rng(s, 0, k);
      const auto sel = select_reference_points(x, y, nrs[k], Metric::L2, rng);
      const auto cx = count_regions(assign_regions(sel.x_rest, sel.tessellation), nrs[k]);
      const auto cy = count_regions(assign_regions(sel.y_rest, sel.tessellation), nrs[k]);
      const auto stat = chi2_statistic(cx, cy);
      rejections[k] += chi2_sf(stat.chi2, Chi2Params{stat.dof}) < 0.05;
    }
  }
  int inversions = 0;
  for (std::size_t k = 1; k < nrs.size(); ++k) inversions += rejections[k] < rejections[k - 1];
  EXPECT_LE(inversions, 1) << rejections[0] << " " << rejections[1] << " " << rejections[2];
}
