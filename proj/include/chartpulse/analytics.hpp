#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "chartpulse/chart.hpp"
#include "chartpulse/estimation.hpp"

namespace chartpulse {

/// Per-rank mean and population standard deviation of daily streams.
struct RankProfile {
  std::vector<double> mean;  // index 0 is rank 1
  std::vector<double> stddev;
  std::size_t samples_per_rank = 0;
};

RankProfile rank_stream_stats(const ChartDataset& dataset, Exec exec = Exec::serial);

/// f(rank) = scale * rank^(-exponent)
struct PowerLawFit {
  double scale = 0.0;
  double exponent = 0.0;
  double r_squared = 0.0;  // in log-log space
  bool degenerate = false;
};

/// OLS of log(mean) on log(rank). Throws DataError if any mean is <= 0.
PowerLawFit fit_power_law(const RankProfile& profile);

/// Least squares on the raw means (Levenberg-Marquardt, started from the
/// log-log fit). r_squared is computed on the raw scale.
PowerLawFit fit_power_law_nonlinear(const RankProfile& profile);

/// Number of distinct songs ever observed at each rank (index 0 is rank 1).
std::vector<std::int64_t> unique_songs_per_rank(const ChartDataset& dataset);

/// Best (numerically smallest) position each song reached.
std::map<SongKey, int> peak_ranks(const ChartDataset& dataset);

struct PeakRankDurations {
  struct Group {
    int peak_rank = 0;
    std::size_t songs = 0;
    double mean_first_life = 0.0;
  };
  std::vector<Group> groups;  // ascending peak rank, only non-empty groups
  /// mean_first_life ~ scale * exp(-rate * peak_rank), OLS on log means
  double scale = 0.0;
  double rate = 0.0;
  double r_squared = 0.0;
  bool fitted = false;  // false with fewer than two groups
};

PeakRankDurations duration_by_peak_rank(const ChartDataset& dataset);

/// Refits scale, rate and r_squared from the current groups.
void fit_duration_curve(PeakRankDurations& durations);

struct NumberOneDay {
  Date date;
  SongKey song;
  std::int64_t streams = 0;
  bool change_point = false;  // differs from the previous day's number one
};

std::vector<NumberOneDay> number_one_timeline(const ChartDataset& dataset);

/// Mean streams at one rank by weekday of the chart date (index 0 = Sunday).
struct WeekdayProfile {
  std::array<double, 7> mean{};
  std::array<std::size_t, 7> days{};
};

/// Throws std::invalid_argument for a rank outside [1, chart_size] or a
/// dataset shorter than seven days.
WeekdayProfile day_of_week_profile(const ChartDataset& dataset, int rank);

struct RateGroup {
  int peak_rank = 0;
  std::size_t songs = 0;
  double mean_slope = 0.0;  // signed regression slope; negative means decay
  double variance = 0.0;    // population
};

/// Groups fitted regression slopes by peak rank. Songs without a fit are skipped.
std::vector<RateGroup> decay_rate_by_peak_rank(const ChartDataset& dataset,
                                               const std::map<SongKey, RegressionResult>& fits);

}  // namespace chartpulse
