#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "chartpulse/chart.hpp"
#include "chartpulse/exec.hpp"
#include "chartpulse/kernels.hpp"

namespace chartpulse {

using FeaturePoint = kernels::Point;

/// Per-song clustering features from the full-series log-linear fit.
struct FeatureVector {
  SongKey song;
  double decay_rate = 0.0;  // positive = decay, negative = growth
  double r_squared = 0.0;

  FeaturePoint point() const { return {decay_rate, r_squared}; }
};

struct FeatureSet {
  std::vector<FeatureVector> features;  // song-key order
  std::vector<SongKey> excluded;        // fewer than min_days usable observations
};

FeatureSet build_features(const ChartDataset& dataset, int min_days, Exec exec = Exec::serial);

/// Per-dimension z-score. A zero-variance dimension maps to 0 and is flagged.
struct Standardization {
  std::array<double, 2> mean{};
  std::array<double, 2> stddev{1.0, 1.0};
  std::array<bool, 2> degenerate{};

  FeaturePoint apply(const FeaturePoint& p) const;
  FeaturePoint invert(const FeaturePoint& z) const;
};

struct StandardizedFeatures {
  std::vector<FeaturePoint> points;
  Standardization transform;
};

/// Throws std::invalid_argument with fewer than two vectors.
StandardizedFeatures standardize(std::span<const FeatureVector> features);

/// Identity transform over raw feature points, for `--no-standardize`.
StandardizedFeatures unscaled(std::span<const FeatureVector> features);

struct ClusteringResult {
  int k = 0;
  std::vector<int> assignments;  // aligned with the input points
  std::vector<FeaturePoint> centroids;
  double inertia = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> inertia_trace;  // after each assignment step
};

/// k-means++ seeding then Lloyd iterations until assignments stop changing or
/// max_iters. Nearest-centroid ties go to the lowest cluster id. An emptied
/// cluster is reseeded at the point farthest from its current centroid.
/// Points are processed in sorted order, so permuting the input permutes the
/// assignments and changes nothing else.
/// Throws std::invalid_argument when k exceeds the number of distinct points.
ClusteringResult kmeans(std::span<const FeaturePoint> points, int k, std::uint64_t seed,
                        int max_iters = 300, Exec exec = Exec::serial);

/// Lowest-inertia run over seeds seed, seed + 1, ..., seed + restarts - 1.
ClusteringResult kmeans_best_of(std::span<const FeaturePoint> points, int k, std::uint64_t seed,
                                int restarts, int max_iters = 300, Exec exec = Exec::serial);

std::size_t distinct_point_count(std::span<const FeaturePoint> points);

struct ElbowPoint {
  int k = 0;
  double inertia = 0.0;
};

/// Best-of-`restarts` inertia for k in [k_min, k_max], capped at the number
/// of distinct points.
std::vector<ElbowPoint> elbow_curve(std::span<const FeaturePoint> points, int k_min, int k_max,
                                    std::uint64_t seed, int restarts, int max_iters = 300);

struct ClusterSummary {
  int cluster = 0;
  std::vector<SongKey> members;
  FeaturePoint centroid{};  // original (decay_rate, r_squared) units
  double rate_min = 0.0;
  double rate_max = 0.0;
  double r_squared_min = 0.0;
  double r_squared_max = 0.0;
};

std::vector<ClusterSummary> cluster_report(const ClusteringResult& result,
                                           std::span<const FeatureVector> features,
                                           const Standardization& transform);

}  // namespace chartpulse
