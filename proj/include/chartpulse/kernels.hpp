#pragma once

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "chartpulse/count_series.hpp"
#include "chartpulse/exec.hpp"
#include "chartpulse/intensity.hpp"

namespace chartpulse {

/// Flat parameter layout shared by the likelihood kernels and the optimizer:
/// [baseline, size_0, decay_0, size_1, decay_1, ...].
inline std::size_t parameter_count(const IntensityParams& p) { return 1 + 2 * p.events.size(); }
inline std::size_t size_index(std::size_t event) { return 1 + 2 * event; }
inline std::size_t decay_index(std::size_t event) { return 2 + 2 * event; }

Eigen::VectorXd pack_parameters(const IntensityParams& params);
/// Writes `flat` into a copy of `shape` (event times are taken from `shape`).
IntensityParams unpack_parameters(const Eigen::VectorXd& flat, const IntensityParams& shape);

enum class Derivatives { none, gradient, hessian };

/// Poisson log-likelihood of a count series and, on request, its exact
/// gradient and Hessian in the flat parameter layout.
struct LikelihoodTerms {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

namespace kernels {

/// Single-threaded reference loop over days.
LikelihoodTerms likelihood_serial(const IntensityParams& params, const CountSeries& series,
                                  double delta, Derivatives want);

/// OpenMP loop over days. Per-thread partial sums are merged in thread order,
/// so results are reproducible for a fixed thread count.
LikelihoodTerms likelihood_parallel(const IntensityParams& params, const CountSeries& series,
                                    double delta, Derivatives want);

using Point = std::array<double, 2>;

/// Writes the nearest centroid (squared Euclidean distance, ties to the lowest
/// index) and its squared distance for every point. Returns how many
/// assignments changed.
std::size_t assign_nearest_serial(std::span<const Point> points, std::span<const Point> centroids,
                                  std::span<int> assignment, std::span<double> distance);

std::size_t assign_nearest_parallel(std::span<const Point> points,
                                    std::span<const Point> centroids, std::span<int> assignment,
                                    std::span<double> distance);

}  // namespace kernels

/// Throws DataError when a day with a positive count has zero expected streams.
LikelihoodTerms evaluate_likelihood(const IntensityParams& params, const CountSeries& series,
                                    double delta, Derivatives want, Exec exec = Exec::serial);

std::size_t assign_nearest(std::span<const kernels::Point> points,
                           std::span<const kernels::Point> centroids, std::span<int> assignment,
                           std::span<double> distance, Exec exec = Exec::serial);

}  // namespace chartpulse
