#pragma once

#include <cstdint>
#include <vector>

namespace chartpulse {

/// Daily counts aligned to model days. counts[k] is the count on model day
/// first_day + k (days are 1-based: day i covers [delta (i-1), delta i]).
struct CountSeries {
  static constexpr std::int64_t kAbsent = -1;

  std::vector<std::int64_t> counts;  // kAbsent marks an unobserved day
  int first_day = 1;

  int last_day() const { return first_day + static_cast<int>(counts.size()) - 1; }
  bool observed(std::size_t k) const { return counts[k] != kAbsent; }
  /// Count on model day `day`, or kAbsent outside the series.
  std::int64_t at_day(int day) const;
  std::size_t observed_days() const;
  std::int64_t total() const;

  static CountSeries from_counts(std::vector<std::int64_t> counts, int first_day = 1) {
    return CountSeries{std::move(counts), first_day};
  }
};

}  // namespace chartpulse
