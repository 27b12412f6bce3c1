#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include <gtest/gtest.h>

#include "chart_builder.hpp"
#include "chartpulse/clustering.hpp"
#include "chartpulse/random.hpp"
#include "oracles.hpp"

namespace chartpulse {
namespace {

using fixture::make_chart;
using fixture::Row;

std::vector<FeatureVector> features_of(const std::vector<FeaturePoint>& points) {
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.push_back({SongKey{"s" + std::to_string(i), "a"}, points[i][0], points[i][1]});
  }
  return out;
}

std::vector<FeaturePoint> random_points(Rng& rng, std::size_t n) {
  std::vector<FeaturePoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0)});
  return pts;
}

// Two labelings describe the same partition when a bijection maps one onto the other.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ab.try_emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.try_emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

TEST(Standardize, TwoPoints) {
  const auto z = standardize(features_of({{0.0, 0.0}, {2.0, 1.0}}));
  EXPECT_EQ(z.points[0], (FeaturePoint{-1.0, -1.0}));
  EXPECT_EQ(z.points[1], (FeaturePoint{1.0, 1.0}));
  EXPECT_FALSE(z.transform.degenerate[0]);
}

TEST(Standardize, IdenticalVectorsAreFlagged) {
  const auto z = standardize(features_of({{0.3, 0.9}, {0.3, 0.9}, {0.3, 0.9}}));
  for (const auto& p : z.points) EXPECT_EQ(p, (FeaturePoint{0.0, 0.0}));
  EXPECT_TRUE(z.transform.degenerate[0]);
  EXPECT_TRUE(z.transform.degenerate[1]);
}

TEST(Standardize, ZeroMeanUnitSpread) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = random_points(rng, 2 + rng.below(200));
    const auto z = standardize(features_of(pts));
    for (std::size_t d = 0; d < 2; ++d) {
      double mean = 0.0, ss = 0.0;
      for (const auto& p : z.points) mean += p[d];
      mean /= static_cast<double>(pts.size());
      for (const auto& p : z.points) ss += (p[d] - mean) * (p[d] - mean);
      EXPECT_NEAR(mean, 0.0, 1e-12);
      EXPECT_NEAR(std::sqrt(ss / static_cast<double>(pts.size())), 1.0, 1e-12);
    }
  }
}

TEST(Standardize, RoundTrip) {
  Rng rng(9);
  const auto pts = random_points(rng, 40);
  const auto z = standardize(features_of(pts));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto back = z.transform.invert(z.points[i]);
    EXPECT_NEAR(back[0], pts[i][0], 1e-12);
    EXPECT_NEAR(back[1], pts[i][1], 1e-12);
  }
  const auto result = kmeans(z.points, 3, 1);
  for (const auto& c : result.centroids) {
    const auto again = z.transform.apply(z.transform.invert(c));
    EXPECT_NEAR(again[0], c[0], 1e-12);
    EXPECT_NEAR(again[1], c[1], 1e-12);
  }
}

TEST(Standardize, NeedsTwoVectors) {
  EXPECT_THROW(standardize(features_of({{1.0, 1.0}})), std::invalid_argument);
}

TEST(KMeans, SingleClusterIsTheMean) {
  Rng rng(1);
  const auto pts = random_points(rng, 25);
  const auto r = kmeans(pts, 1, 0);
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) mx += p[0], my += p[1];
  mx /= 25.0;
  my /= 25.0;
  double total = 0.0;
  for (const auto& p : pts) total += (p[0] - mx) * (p[0] - mx) + (p[1] - my) * (p[1] - my);
  EXPECT_NEAR(r.centroids[0][0], mx, 1e-14);
  EXPECT_NEAR(r.centroids[0][1], my, 1e-14);
  EXPECT_NEAR(r.inertia, total, 1e-12);
  for (int a : r.assignments) EXPECT_EQ(a, 0);
}

TEST(KMeans, TwoSeparatedPairs) {
  const std::vector<FeaturePoint> pts{{0.0, 0.0}, {10.0, 10.0}, {0.0, 1.0}, {10.0, 11.0}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = kmeans(pts, 2, seed);
    EXPECT_EQ(r.assignments[0], r.assignments[2]);
    EXPECT_EQ(r.assignments[1], r.assignments[3]);
    EXPECT_NE(r.assignments[0], r.assignments[1]);
    EXPECT_DOUBLE_EQ(r.inertia, 1.0);  // two pairs at distance 1, 0.25 + 0.25 each
  }
}

TEST(KMeans, MatchesBruteForceOracle) {
  Rng rng(77);
  int optimal = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const auto pts = random_points(rng, 3 + rng.below(6));
    const double best = oracle::best_two_partition_inertia(pts);
    const auto r = kmeans_best_of(pts, 2, static_cast<std::uint64_t>(instance) * 10, 10);
    EXPECT_GE(r.inertia, best * (1.0 - 1e-12)) << "instance " << instance;
    if (r.inertia <= best * (1.0 + 1e-9)) ++optimal;
  }
  EXPECT_GE(optimal, 95);
}

TEST(KMeans, InertiaNeverIncreases) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = random_points(rng, 50 + rng.below(300));
    const auto r = kmeans(pts, 2 + static_cast<int>(rng.below(8)), static_cast<std::uint64_t>(trial));
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
      EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] * (1.0 + 1e-12)) << "trial " << trial;
    }
    EXPECT_DOUBLE_EQ(r.inertia, r.inertia_trace.back());
  }
}

TEST(KMeans, NoEmptyClusters) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    // heavy duplication pushes Lloyd toward empty clusters
    auto pts = random_points(rng, 6);
    for (int copy = 0; copy < 5; ++copy) pts.push_back(pts[rng.below(6)]);
    const int k = 2 + static_cast<int>(rng.below(5));
    const auto r = kmeans(pts, k, static_cast<std::uint64_t>(trial));
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int a : r.assignments) ++sizes[static_cast<std::size_t>(a)];
    for (int s : sizes) EXPECT_GT(s, 0) << "trial " << trial;
  }
}

TEST(KMeans, Deterministic) {
  Rng rng(2);
  const auto pts = random_points(rng, 200);
  const auto a = kmeans(pts, 5, 11);
  const auto b = kmeans(pts, 5, 11, 300, Exec::parallel);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.inertia, b.inertia);
}

TEST(KMeans, PermutationOnlyRelabels) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_points(rng, 30 + rng.below(100));
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<FeaturePoint> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    const auto a = kmeans(pts, 4, 7);
    const auto b = kmeans(shuffled, 4, 7);
    std::vector<int> b_in_original_order(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) b_in_original_order[perm[i]] = b.assignments[i];
    EXPECT_TRUE(same_partition(a.assignments, b_in_original_order)) << "trial " << trial;
    EXPECT_DOUBLE_EQ(a.inertia, b.inertia);
  }
}

TEST(KMeans, RejectsTooManyClusters) {
  const std::vector<FeaturePoint> pts{{0, 0}, {0, 0}, {1, 1}};
  EXPECT_EQ(distinct_point_count(pts), 2u);
  EXPECT_NO_THROW(kmeans(pts, 2, 0));
  EXPECT_THROW(kmeans(pts, 3, 0), std::invalid_argument);
  EXPECT_THROW(kmeans(pts, 0, 0), std::invalid_argument);
}

TEST(KMeans, GrowthSongsSeparateFromDecay) {
  const auto features = features_of({{0.08, 0.95}, {0.11, 0.97}, {-0.06, 0.9}, {-0.09, 0.93}});
  const auto z = standardize(features);
  const auto r = kmeans(z.points, 2, 0);
  EXPECT_EQ(r.assignments[0], r.assignments[1]);
  EXPECT_EQ(r.assignments[2], r.assignments[3]);
  EXPECT_NE(r.assignments[0], r.assignments[2]);
  const auto report = cluster_report(r, features, z.transform);
  const auto& growth = report[static_cast<std::size_t>(r.assignments[2])];
  EXPECT_LT(growth.rate_max, 0.0);
  EXPECT_NEAR(growth.centroid[0], -0.075, 1e-12);
}

TEST(ElbowCurve, CoversRequestedRangeUpToDistinctPoints) {
  Rng rng(12);
  const auto pts = random_points(rng, 9);
  const auto curve = elbow_curve(pts, 2, 12, 0, 3);
  ASSERT_EQ(curve.size(), 8u);
  EXPECT_EQ(curve.front().k, 2);
  EXPECT_EQ(curve.back().k, 9);
  EXPECT_NEAR(curve.back().inertia, 0.0, 1e-15);
}

TEST(ClusterReport, SingleClusterListsEverySong) {
  Rng rng(13);
  const auto pts = random_points(rng, 12);
  const auto features = features_of(pts);
  const auto z = standardize(features);
  const auto r = kmeans(z.points, 1, 0);
  const auto report = cluster_report(r, features, z.transform);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].members.size(), 12u);
  double mean_rate = 0.0;
  for (const auto& p : pts) mean_rate += p[0];
  EXPECT_NEAR(report[0].centroid[0], mean_rate / 12.0, 1e-12);
}

TEST(ClusterReport, RejectsMismatchedFeatures) {
  const auto features = features_of({{0, 0}, {1, 1}});
  const auto r = kmeans(unscaled(features).points, 1, 0);
  EXPECT_THROW(cluster_report(r, features_of({{0, 0}}), Standardization{}), std::invalid_argument);
}

std::vector<std::vector<Row>> two_song_chart(int days) {
  std::vector<std::vector<Row>> out;
  for (int i = 1; i <= days; ++i) {
    const auto decay = static_cast<std::int64_t>(std::llround(1000.0 * std::exp(-0.1 * i)));
    const auto growth = static_cast<std::int64_t>(std::llround(50.0 * std::exp(0.05 * i)));
    out.push_back({{"Decay", decay}, {"Growth", growth}});
  }
  out.push_back({{"Once", 5}, {"Growth", 1}});
  return out;
}

TEST(BuildFeatures, RatesAndExclusions) {
  const auto ds = make_chart(two_song_chart(30), 2);
  const auto set = build_features(ds, 2);
  ASSERT_EQ(set.features.size(), 2u);
  ASSERT_EQ(set.excluded.size(), 1u);
  EXPECT_EQ(set.excluded[0].title, "Once");
  const auto& decay = set.features[0];
  EXPECT_EQ(decay.song.title, "Decay");
  EXPECT_NEAR(decay.decay_rate, 0.1, 1e-3);
  EXPECT_GT(decay.r_squared, 0.999);
  // Growth's last day (1 stream) pulls its fit but the rate stays negative
  EXPECT_LT(set.features[1].decay_rate, 0.0);
}

TEST(BuildFeatures, MinDaysThreshold) {
  const auto ds = make_chart(two_song_chart(10), 2);
  EXPECT_EQ(build_features(ds, 11).features.size(), 1u);  // Growth has 11 days
  EXPECT_EQ(build_features(ds, 12).features.size(), 0u);
  EXPECT_THROW(build_features(ds, 1), std::invalid_argument);
}

TEST(BuildFeatures, ParallelMatchesSerial) {
  const auto ds = fixture::random_chart(31, 30, 50, true);
  const auto a = build_features(ds, 3, Exec::serial);
  const auto b = build_features(ds, 3, Exec::parallel);
  ASSERT_EQ(a.features.size(), b.features.size());
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    EXPECT_EQ(a.features[i].song, b.features[i].song);
    EXPECT_EQ(a.features[i].decay_rate, b.features[i].decay_rate);
    EXPECT_EQ(a.features[i].r_squared, b.features[i].r_squared);
  }
  EXPECT_EQ(a.excluded, b.excluded);
}

}  // namespace
}  // namespace chartpulse
