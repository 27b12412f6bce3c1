#include "chartpulse/simulation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace chartpulse {

namespace {

// Substream reserved for thinning; daily counts use streams 1..T.
constexpr std::uint64_t kEventStream = 0xE7E7'0000'0000'0001ULL;

std::int64_t poisson_inversion(double mean, Rng& rng) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::int64_t k = 0;
  while (u >= cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    const double next = cdf + p;
    if (next == cdf) break;  // remaining tail below double resolution
    cdf = next;
  }
  return k;
}

// W. Hormann, "The transformed rejection method for generating Poisson
// random variables", Insurance: Mathematics and Economics 12 (1993).
std::int64_t poisson_ptrs(double mean, Rng& rng) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (k > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2)) continue;
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -mean + k * loglam - std::lgamma(k + 1.0);
    if (lhs <= rhs) return static_cast<std::int64_t>(k);
  }
}

}  // namespace

std::int64_t poisson_sample(double mean, Rng& rng) {
  if (!std::isfinite(mean) || mean < 0.0) {
    throw std::domain_error("poisson mean must be finite and non-negative");
  }
  if (mean == 0.0) return 0;
  return mean < 10.0 ? poisson_inversion(mean, rng) : poisson_ptrs(mean, rng);
}

std::vector<std::int64_t> simulate_daily_counts(const IntensityParams& params,
                                                const SimConfig& config, Exec exec) {
  params.validate();
  config.grid.validate();
  const int days = config.grid.days;
  std::vector<std::int64_t> out(static_cast<std::size_t>(days));
  auto draw = [&](int i) {
    Rng rng(config.seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i - 1)] =
        poisson_sample(integrated_intensity(params, i, config.grid.delta), rng);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 1; i <= days; ++i) draw(i);
  } else {
    for (int i = 1; i <= days; ++i) draw(i);
  }
  return out;
}

std::vector<ThinningSegment> thinning_segments(const IntensityParams& params, double horizon) {
  std::vector<ThinningSegment> segments;
  double start = 0.0;
  for (const auto& e : params.events) {
    if (e.time >= horizon) break;
    if (e.time > start) {
      segments.push_back({start, e.time, intensity_at(params, start)});
      start = e.time;
    }
  }
  if (start < horizon) segments.push_back({start, horizon, intensity_at(params, start)});
  return segments;
}

std::vector<double> simulate_event_times(const IntensityParams& params, double horizon,
                                         std::uint64_t seed) {
  params.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  Rng rng(seed, kEventStream);
  std::vector<double> times;
  for (const auto& seg : thinning_segments(params, horizon)) {
    if (seg.bound <= 0.0) continue;
    double t = seg.start;
    for (;;) {
      t += -std::log(rng.uniform_positive()) / seg.bound;
      if (t >= seg.end) break;
      if (rng.uniform() * seg.bound < intensity_at(params, t)) times.push_back(t);
    }
  }
  return times;
}

std::vector<std::int64_t> bin_event_times(std::span<const double> times, const DayGrid& grid) {
  grid.validate();
  std::vector<std::int64_t> bins(static_cast<std::size_t>(grid.days), 0);
  for (double t : times) {
    const auto day = static_cast<long>(std::floor(t / grid.delta));
    if (day >= 0 && day < grid.days) ++bins[static_cast<std::size_t>(day)];
  }
  return bins;
}

}  // namespace chartpulse
