#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chartpulse/exec.hpp"
#include "chartpulse/intensity.hpp"
#include "chartpulse/random.hpp"

namespace chartpulse {

enum class SimMode { daily_counts, event_times };

struct SimConfig {
  DayGrid grid;
  std::uint64_t seed = 0;
  SimMode mode = SimMode::daily_counts;
};

/// Exact Poisson draw: sequential-search inversion below a mean of 10,
/// Hormann's transformed rejection (PTRS) from 10 up. Throws
/// std::domain_error for a negative or non-finite mean.
std::int64_t poisson_sample(double mean, Rng& rng);

/// Independent Poisson counts with means expected_daily_counts. Day i draws
/// from substream i of the seed, so the output does not depend on `exec`.
std::vector<std::int64_t> simulate_daily_counts(const IntensityParams& params,
                                                const SimConfig& config,
                                                Exec exec = Exec::serial);

/// Interval between consecutive event times (or horizon) with the rate that
/// dominates the intensity on it: the intensity at its left end.
struct ThinningSegment {
  double start = 0.0;
  double end = 0.0;
  double bound = 0.0;
};

std::vector<ThinningSegment> thinning_segments(const IntensityParams& params, double horizon);

/// Point times on [0, horizon) by Lewis-Shedler thinning.
std::vector<double> simulate_event_times(const IntensityParams& params, double horizon,
                                         std::uint64_t seed);

/// Counts of times in each day of the grid.
std::vector<std::int64_t> bin_event_times(std::span<const double> times, const DayGrid& grid);

}  // namespace chartpulse
