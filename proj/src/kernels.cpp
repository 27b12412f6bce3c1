#include "chartpulse/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "chartpulse/error.hpp"

namespace chartpulse {

int parallel_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::int64_t CountSeries::at_day(int day) const {
  if (day < first_day || day > last_day()) return kAbsent;
  return counts[static_cast<std::size_t>(day - first_day)];
}

std::size_t CountSeries::observed_days() const {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](std::int64_t n) { return n != kAbsent; }));
}

std::int64_t CountSeries::total() const {
  std::int64_t sum = 0;
  for (auto n : counts) {
    if (n != kAbsent) sum += n;
  }
  return sum;
}

Eigen::VectorXd pack_parameters(const IntensityParams& params) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(params)));
  flat[0] = params.baseline;
  for (std::size_t j = 0; j < params.events.size(); ++j) {
    flat[static_cast<Eigen::Index>(size_index(j))] = params.events[j].size;
    flat[static_cast<Eigen::Index>(decay_index(j))] = params.events[j].decay;
  }
  return flat;
}

IntensityParams unpack_parameters(const Eigen::VectorXd& flat, const IntensityParams& shape) {
  IntensityParams out = shape;
  out.baseline = flat[0];
  for (std::size_t j = 0; j < out.events.size(); ++j) {
    out.events[j].size = flat[static_cast<Eigen::Index>(size_index(j))];
    out.events[j].decay = flat[static_cast<Eigen::Index>(decay_index(j))];
  }
  return out;
}

namespace {

struct Accumulator {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  // per-day scratch
  Eigen::VectorXd day_grad;
  Eigen::VectorXd day_cross;  // d2D / dsize ddecay per event
  Eigen::VectorXd day_curv;   // d2D / ddecay^2 per event
  int impossible_day = 0;

  Accumulator(std::size_t p, std::size_t events, Derivatives want) {
    const auto n = static_cast<Eigen::Index>(p);
    const auto m = static_cast<Eigen::Index>(events);
    if (want != Derivatives::none) gradient = Eigen::VectorXd::Zero(n);
    if (want == Derivatives::hessian) hessian = Eigen::MatrixXd::Zero(n, n);
    day_grad.resize(n);
    day_cross.resize(m);
    day_curv.resize(m);
  }
};

// Adds one observed day to the running sums.
void accumulate_day(const IntensityParams& params, int day, std::int64_t count, double delta,
                    Derivatives want, Accumulator& acc) {
  double mass = params.baseline * delta;
  if (want != Derivatives::none) {
    acc.day_grad.setZero();
    acc.day_cross.setZero();
    acc.day_curv.setZero();
    acc.day_grad[0] = delta;
  }
  for (std::size_t j = 0; j < params.events.size(); ++j) {
    const auto& e = params.events[j];
    const double hi = std::max(delta * day - e.time, 0.0);
    if (hi <= 0.0) continue;
    const double lo = std::max(delta * (day - 1) - e.time, 0.0);
    const double e_lo = std::exp(-e.decay * lo);
    const double ratio = std::exp(-e.decay * (hi - lo));
    const double e_hi = e_lo * ratio;
    const double dmass_dsize = e_lo * -std::expm1(-e.decay * (hi - lo));
    mass += e.size * dmass_dsize;
    if (want == Derivatives::none) continue;
    const double slope_term = hi * e_hi - lo * e_lo;  // d/ddecay of (e_lo - e_hi)
    const auto js = static_cast<Eigen::Index>(j);
    acc.day_grad[static_cast<Eigen::Index>(size_index(j))] = dmass_dsize;
    acc.day_grad[static_cast<Eigen::Index>(decay_index(j))] = e.size * slope_term;
    acc.day_cross[js] = slope_term;
    acc.day_curv[js] = e.size * (lo * lo * e_lo - hi * hi * e_hi);
  }

  const auto n = static_cast<double>(count);
  if (mass <= 0.0) {
    if (count > 0) {
      if (acc.impossible_day == 0) acc.impossible_day = day;
      return;
    }
    mass = 0.0;
  }
  acc.value += (count > 0 ? n * std::log(mass) : 0.0) - std::lgamma(n + 1.0) - mass;
  if (want == Derivatives::none) return;

  const double weight = count > 0 ? n / mass - 1.0 : -1.0;
  acc.gradient.noalias() += weight * acc.day_grad;
  if (want != Derivatives::hessian) return;

  if (count > 0) {
    acc.hessian.noalias() -= (n / (mass * mass)) * acc.day_grad * acc.day_grad.transpose();
  }
  for (std::size_t j = 0; j < params.events.size(); ++j) {
    const auto js = static_cast<Eigen::Index>(j);
    const auto s = static_cast<Eigen::Index>(size_index(j));
    const auto b = static_cast<Eigen::Index>(decay_index(j));
    acc.hessian(s, b) += weight * acc.day_cross[js];
    acc.hessian(b, s) += weight * acc.day_cross[js];
    acc.hessian(b, b) += weight * acc.day_curv[js];
  }
}

void check_inputs(const CountSeries& series, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (series.first_day < 1) throw std::invalid_argument("series must start on day >= 1");
}

[[noreturn]] void throw_impossible(int day, const CountSeries& series) {
  throw DataError("impossible observation: day " + std::to_string(day) + " has " +
                  std::to_string(series.at_day(day)) +
                  " streams but zero expected streams (log-likelihood is -inf)");
}

LikelihoodTerms finish(Accumulator&& acc) {
  LikelihoodTerms out;
  out.value = acc.value;
  out.gradient = std::move(acc.gradient);
  out.hessian = std::move(acc.hessian);
  return out;
}

}  // namespace

namespace kernels {

LikelihoodTerms likelihood_serial(const IntensityParams& params, const CountSeries& series,
                                  double delta, Derivatives want) {
  check_inputs(series, delta);
  Accumulator acc(parameter_count(params), params.events.size(), want);
  for (std::size_t k = 0; k < series.counts.size(); ++k) {
    if (!series.observed(k)) continue;
    accumulate_day(params, series.first_day + static_cast<int>(k), series.counts[k], delta, want,
                   acc);
  }
  if (acc.impossible_day != 0) throw_impossible(acc.impossible_day, series);
  return finish(std::move(acc));
}

LikelihoodTerms likelihood_parallel(const IntensityParams& params, const CountSeries& series,
                                    double delta, Derivatives want) {
  check_inputs(series, delta);
  const std::size_t p = parameter_count(params);
  const int threads = parallel_threads();
  std::vector<Accumulator> partial;
  partial.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) partial.emplace_back(p, params.events.size(), want);

  const auto days = static_cast<long>(series.counts.size());
#pragma omp parallel num_threads(threads)
  {
#ifdef _OPENMP
    Accumulator& acc = partial[static_cast<std::size_t>(omp_get_thread_num())];
#else
    Accumulator& acc = partial[0];
#endif
#pragma omp for schedule(static)
    for (long k = 0; k < days; ++k) {
      const auto idx = static_cast<std::size_t>(k);
      if (!series.observed(idx)) continue;
      accumulate_day(params, series.first_day + static_cast<int>(k), series.counts[idx], delta,
                     want, acc);
    }
  }

  Accumulator total(p, params.events.size(), want);
  for (auto& acc : partial) {
    if (acc.impossible_day != 0 &&
        (total.impossible_day == 0 || acc.impossible_day < total.impossible_day)) {
      total.impossible_day = acc.impossible_day;
    }
    total.value += acc.value;
    if (want != Derivatives::none) total.gradient += acc.gradient;
    if (want == Derivatives::hessian) total.hessian += acc.hessian;
  }
  if (total.impossible_day != 0) throw_impossible(total.impossible_day, series);
  return finish(std::move(total));
}

namespace {

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

inline bool assign_one(const Point& point, std::span<const Point> centroids, int& assignment,
                       double& distance) {
  int best = 0;
  double best_d = squared_distance(point, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(point, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  distance = best_d;
  const bool changed = assignment != best;
  assignment = best;
  return changed;
}

}  // namespace

std::size_t assign_nearest_serial(std::span<const Point> points, std::span<const Point> centroids,
                                  std::span<int> assignment, std::span<double> distance) {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (assign_one(points[i], centroids, assignment[i], distance[i])) ++changed;
  }
  return changed;
}

std::size_t assign_nearest_parallel(std::span<const Point> points,
                                    std::span<const Point> centroids, std::span<int> assignment,
                                    std::span<double> distance) {
  long changed = 0;
  const auto n = static_cast<long>(points.size());
#pragma omp parallel for schedule(static) reduction(+ : changed)
  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (assign_one(points[idx], centroids, assignment[idx], distance[idx])) ++changed;
  }
  return static_cast<std::size_t>(changed);
}

}  // namespace kernels

LikelihoodTerms evaluate_likelihood(const IntensityParams& params, const CountSeries& series,
                                    double delta, Derivatives want, Exec exec) {
  return exec == Exec::parallel ? kernels::likelihood_parallel(params, series, delta, want)
                                : kernels::likelihood_serial(params, series, delta, want);
}

std::size_t assign_nearest(std::span<const kernels::Point> points,
                           std::span<const kernels::Point> centroids, std::span<int> assignment,
                           std::span<double> distance, Exec exec) {
  return exec == Exec::parallel
             ? kernels::assign_nearest_parallel(points, centroids, assignment, distance)
             : kernels::assign_nearest_serial(points, centroids, assignment, distance);
}

}  // namespace chartpulse
