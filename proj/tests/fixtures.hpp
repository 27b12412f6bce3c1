#pragma once

// Random problem instances shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "chartpulse/count_series.hpp"
#include "chartpulse/intensity.hpp"
#include "chartpulse/random.hpp"
#include "chartpulse/simulation.hpp"
#include "oracles.hpp"

namespace chartpulse::fixture {

/// A parameter set with counts drawn from the model at those parameters.
struct FeasiblePoint {
  IntensityParams params;
  CountSeries series;
  double delta = 1.0;
};

/// baseline in [1e3, 1e6], sizes in [1e4, 1e7], decays in [0.01, 1],
/// T in [30, 400], 1 to 3 events, the first at time 0 and the rest on
/// distinct whole days inside the series.
inline FeasiblePoint random_feasible_point(std::uint64_t seed) {
  Rng rng(seed, 0xFEA5);
  FeasiblePoint pt;
  const int days = 30 + static_cast<int>(rng.below(371));
  pt.params.baseline = std::exp(rng.uniform(std::log(1e3), std::log(1e6)));
  const int events = 1 + static_cast<int>(rng.below(3));
  std::set<int> times{0};
  while (static_cast<int>(times.size()) < events) {
    times.insert(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(days - 1))));
  }
  for (int t : times) {
    pt.params.events.push_back({static_cast<double>(t),
                                std::exp(rng.uniform(std::log(1e4), std::log(1e7))),
                                rng.uniform(0.01, 1.0)});
  }
  const auto counts = simulate_daily_counts(pt.params, SimConfig{DayGrid{1.0, days}, seed});
  pt.series = CountSeries::from_counts(counts);
  return pt;
}

/// Five-point central differences of the extended-precision log-likelihood
/// oracle with step h_k = rel_step * |p_k| (all parameters are positive).
/// Returns {first, second} derivatives.
struct FiniteDifferences {
  std::vector<double> first;
  std::vector<double> second;
};

inline FiniteDifferences finite_differences(const IntensityParams& p, const CountSeries& s,
                                            double delta, double grad_step, double curv_step) {
  auto with = [&](std::size_t k, long double shift) {
    IntensityParams q = p;
    if (k == 0) {
      q.baseline += static_cast<double>(shift);
    } else {
      auto& e = q.events[(k - 1) / 2];
      ((k - 1) % 2 == 0 ? e.size : e.decay) += static_cast<double>(shift);
    }
    return oracle::log_pmf_sum(q, s, delta, false);
  };
  auto value_of = [&](std::size_t k) {
    if (k == 0) return p.baseline;
    const auto& e = p.events[(k - 1) / 2];
    return (k - 1) % 2 == 0 ? e.size : e.decay;
  };
  const std::size_t n = 1 + 2 * p.events.size();
  const long double center = oracle::log_pmf_sum(p, s, delta, false);
  FiniteDifferences fd;
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = std::abs(value_of(k)) > 0.0 ? std::abs(value_of(k)) : 1.0;
    // round the step so p +- h and p +- 2h are exact in double
    const volatile double h1_tmp = value_of(k) + grad_step * scale;
    const long double h1 = static_cast<long double>(h1_tmp) - value_of(k);
    fd.first.push_back(static_cast<double>(
        (8.0L * (with(k, h1) - with(k, -h1)) - (with(k, 2 * h1) - with(k, -2 * h1))) / (12.0L * h1)));
    const volatile double h2_tmp = value_of(k) + curv_step * scale;
    const long double h2 = static_cast<long double>(h2_tmp) - value_of(k);
    fd.second.push_back(static_cast<double>(
        (-(with(k, 2 * h2) + with(k, -2 * h2)) + 16.0L * (with(k, h2) + with(k, -h2)) - 30.0L * center) /
        (12.0L * h2 * h2)));
  }
  return fd;
}

inline double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

}  // namespace chartpulse::fixture
