#include "chartpulse/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "chartpulse/estimation.hpp"
#include "chartpulse/random.hpp"

namespace chartpulse {

FeatureSet build_features(const ChartDataset& dataset, int min_days, Exec exec) {
  if (min_days < 2) throw std::invalid_argument("min_days must be >= 2");
  std::vector<const SongKey*> keys;
  keys.reserve(dataset.song_count());
  for (const auto& [key, apps] : dataset.song_index()) keys.push_back(&key);

  std::vector<std::optional<FeatureVector>> slots(keys.size());
  auto build_one = [&](std::size_t i) {
    const DailySeries series = extract_song_series(dataset, *keys[i]);
    if (series.present_count() < static_cast<std::size_t>(min_days)) return;
    const CountSeries counts = to_count_series(series);
    try {
      const auto fit = fit_log_linear(counts, RegressionWindow::full(counts));
      slots[i] = FeatureVector{*keys[i], fit.decay_rate, fit.r_squared};
    } catch (const std::exception&) {
      // fewer than two positive counts; reported as excluded
    }
  };
  const auto n = static_cast<long>(keys.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) build_one(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < n; ++i) build_one(static_cast<std::size_t>(i));
  }

  FeatureSet out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      out.features.push_back(std::move(*slots[i]));
    } else {
      out.excluded.push_back(*keys[i]);
    }
  }
  return out;
}

FeaturePoint Standardization::apply(const FeaturePoint& p) const {
  FeaturePoint z{};
  for (std::size_t d = 0; d < 2; ++d) z[d] = degenerate[d] ? 0.0 : (p[d] - mean[d]) / stddev[d];
  return z;
}

FeaturePoint Standardization::invert(const FeaturePoint& z) const {
  FeaturePoint p{};
  for (std::size_t d = 0; d < 2; ++d) p[d] = degenerate[d] ? mean[d] : z[d] * stddev[d] + mean[d];
  return p;
}

StandardizedFeatures standardize(std::span<const FeatureVector> features) {
  if (features.size() < 2) throw std::invalid_argument("standardize needs at least 2 features");
  StandardizedFeatures out;
  auto& t = out.transform;
  const auto n = static_cast<double>(features.size());
  for (const auto& f : features) {
    const auto p = f.point();
    t.mean[0] += p[0];
    t.mean[1] += p[1];
  }
  t.mean[0] /= n;
  t.mean[1] /= n;
  std::array<double, 2> ss{};
  for (const auto& f : features) {
    const auto p = f.point();
    for (std::size_t d = 0; d < 2; ++d) ss[d] += (p[d] - t.mean[d]) * (p[d] - t.mean[d]);
  }
  for (std::size_t d = 0; d < 2; ++d) {
    t.stddev[d] = std::sqrt(ss[d] / n);
    t.degenerate[d] = !(t.stddev[d] > 0.0);
    if (t.degenerate[d]) t.stddev[d] = 1.0;
  }
  out.points.reserve(features.size());
  for (const auto& f : features) out.points.push_back(t.apply(f.point()));
  return out;
}

StandardizedFeatures unscaled(std::span<const FeatureVector> features) {
  StandardizedFeatures out;
  for (const auto& f : features) out.points.push_back(f.point());
  return out;
}

std::size_t distinct_point_count(std::span<const FeaturePoint> points) {
  std::vector<FeaturePoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

namespace {

double squared_distance(const FeaturePoint& a, const FeaturePoint& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

std::vector<FeaturePoint> seed_plus_plus(std::span<const FeaturePoint> points, int k, Rng& rng) {
  std::vector<FeaturePoint> centroids;
  centroids.push_back(points[rng.below(points.size())]);
  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        cumulative += d2[i];
        if (cumulative > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;  // rounding at the tail
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
  }
  return centroids;
}

void update_centroids(std::span<const FeaturePoint> points, std::vector<int>& assignment,
                      std::span<const double> distance, std::vector<FeaturePoint>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<FeaturePoint> sum(k, FeaturePoint{0.0, 0.0});
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignment[i]);
    sum[c][0] += points[i][0];
    sum[c][1] += points[i][1];
    ++count[c];
  }
  std::vector<bool> taken(points.size(), false);
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] > 0) {
      centroids[c] = {sum[c][0] / static_cast<double>(count[c]),
                      sum[c][1] / static_cast<double>(count[c])};
      continue;
    }
    // empty: move to the point farthest from its centroid, from a cluster that keeps a member
    std::size_t far = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto owner = static_cast<std::size_t>(assignment[i]);
      if (taken[i] || count[owner] < 2) continue;
      if (far == points.size() || distance[i] > distance[far]) far = i;
    }
    if (far == points.size()) continue;
    taken[far] = true;
    --count[static_cast<std::size_t>(assignment[far])];
    assignment[far] = static_cast<int>(c);
    count[c] = 1;
    centroids[c] = points[far];
  }
}

}  // namespace

ClusteringResult kmeans(std::span<const FeaturePoint> input, int k, std::uint64_t seed,
                        int max_iters, Exec exec) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (static_cast<std::size_t>(k) > distinct_point_count(input)) {
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " +
                                std::to_string(distinct_point_count(input)) + " distinct points");
  }
  // Work in sorted point order so the partition does not depend on input order.
  std::vector<std::size_t> order(input.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return input[a] < input[b]; });
  std::vector<FeaturePoint> points(input.size());
  for (std::size_t i = 0; i < order.size(); ++i) points[i] = input[order[i]];

  Rng rng(seed);
  ClusteringResult result;
  result.k = k;
  result.seed = seed;
  result.centroids = seed_plus_plus(points, k, rng);
  std::vector<int> assignment(points.size(), -1);
  std::vector<double> distance(points.size(), 0.0);

  bool stable = false;
  for (int iter = 1; iter <= max_iters; ++iter) {
    const auto changed = assign_nearest(points, result.centroids, assignment, distance, exec);
    result.iterations = iter;
    double inertia = 0.0;
    for (double d : distance) inertia += d;
    result.inertia_trace.push_back(inertia);
    if (changed == 0) {
      stable = true;
      break;
    }
    update_centroids(points, assignment, distance, result.centroids);
  }
  if (!stable) assign_nearest(points, result.centroids, assignment, distance, exec);
  result.inertia = 0.0;
  for (double d : distance) result.inertia += d;
  result.assignments.assign(input.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) result.assignments[order[i]] = assignment[i];
  return result;
}

ClusteringResult kmeans_best_of(std::span<const FeaturePoint> points, int k, std::uint64_t seed,
                                int restarts, int max_iters, Exec exec) {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  ClusteringResult best = kmeans(points, k, seed, max_iters, exec);
  for (int r = 1; r < restarts; ++r) {
    ClusteringResult next = kmeans(points, k, seed + static_cast<std::uint64_t>(r), max_iters, exec);
    if (next.inertia < best.inertia) best = std::move(next);
  }
  return best;
}

std::vector<ElbowPoint> elbow_curve(std::span<const FeaturePoint> points, int k_min, int k_max,
                                    std::uint64_t seed, int restarts, int max_iters) {
  std::vector<ElbowPoint> curve;
  const int cap = static_cast<int>(distinct_point_count(points));
  for (int k = std::max(k_min, 1); k <= std::min(k_max, cap); ++k) {
    curve.push_back({k, kmeans_best_of(points, k, seed, restarts, max_iters).inertia});
  }
  return curve;
}

std::vector<ClusterSummary> cluster_report(const ClusteringResult& result,
                                           std::span<const FeatureVector> features,
                                           const Standardization& transform) {
  if (result.assignments.size() != features.size()) {
    throw std::invalid_argument("clustering result does not match the feature list");
  }
  std::vector<ClusterSummary> report(static_cast<std::size_t>(result.k));
  for (int c = 0; c < result.k; ++c) {
    auto& s = report[static_cast<std::size_t>(c)];
    s.cluster = c;
    s.centroid = transform.invert(result.centroids[static_cast<std::size_t>(c)]);
    s.rate_min = s.r_squared_min = std::numeric_limits<double>::infinity();
    s.rate_max = s.r_squared_max = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto& s = report[static_cast<std::size_t>(result.assignments[i])];
    const auto& f = features[i];
    s.members.push_back(f.song);
    s.rate_min = std::min(s.rate_min, f.decay_rate);
    s.rate_max = std::max(s.rate_max, f.decay_rate);
    s.r_squared_min = std::min(s.r_squared_min, f.r_squared);
    s.r_squared_max = std::max(s.r_squared_max, f.r_squared);
  }
  return report;
}

}  // namespace chartpulse
