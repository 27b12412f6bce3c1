#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chartpulse/date.hpp"

namespace chartpulse {

/// Song identity: (title, artist) after NFC normalization and trimming.
struct SongKey {
  std::string title;
  std::string artist;

  auto operator<=>(const SongKey&) const = default;

  /// `title::artist`, the form accepted by `--song`.
  std::string str() const;

  /// Parses `title::artist`. A selector without `::` yields an empty artist.
  static SongKey parse(std::string_view selector);
};

/// Unicode NFC normalization followed by whitespace trimming.
std::string normalize_text(std::string_view text);

SongKey make_song_key(std::string_view title, std::string_view artist);

struct ChartEntry {
  Date date;
  int position = 0;
  std::string title;
  std::string artist;
  std::int64_t streams = 0;

  SongKey key() const { return SongKey{title, artist}; }
  bool operator==(const ChartEntry&) const = default;
};

struct Appearance {
  std::size_t day_index = 0;  // index into ChartDataset::days()
  int position = 0;
  std::int64_t streams = 0;

  bool operator==(const Appearance&) const = default;
};

/// Validated daily top-N chart. Immutable once built; safe for concurrent reads.
class ChartDataset {
 public:
  using SongIndex = std::map<SongKey, std::vector<Appearance>>;

  /// Groups, sorts, and validates raw entries. Throws DataError on duplicate
  /// (date, position), out-of-range positions, or dates with a row count other
  /// than `chart_size`. Streams that increase with position are reported in
  /// warnings() rather than rejected.
  static ChartDataset from_entries(std::vector<ChartEntry> entries, int chart_size);

  int chart_size() const { return chart_size_; }
  std::size_t day_count() const { return days_.size(); }
  std::size_t song_count() const { return song_index_.size(); }
  bool empty() const { return days_.empty(); }

  std::span<const Date> days() const { return days_; }
  std::span<const ChartEntry> entries() const { return entries_; }
  /// The chart_size entries of one day, ordered by position.
  std::span<const ChartEntry> day_entries(std::size_t day_index) const;

  const SongIndex& song_index() const { return song_index_; }
  bool contains(const SongKey& key) const { return song_index_.contains(key); }
  /// Throws DataError for an unknown key.
  const std::vector<Appearance>& appearances(const SongKey& key) const;

  /// Calendar days inside [first, last] that have no chart.
  std::span<const Date> missing_dates() const { return missing_; }
  std::span<const std::string> warnings() const { return warnings_; }

  bool operator==(const ChartDataset& other) const {
    return chart_size_ == other.chart_size_ && days_ == other.days_ &&
           entries_ == other.entries_ && song_index_ == other.song_index_;
  }

 private:
  int chart_size_ = 0;
  std::vector<Date> days_;
  std::vector<ChartEntry> entries_;
  SongIndex song_index_;
  std::vector<Date> missing_;
  std::vector<std::string> warnings_;
};

/// Reads the chart CSV interchange format. Required columns (any order,
/// case-insensitive): date, position, track, artist, streams. Extra columns
/// are ignored. A UTF-8 byte-order mark is tolerated.
ChartDataset parse_chart_csv(std::istream& in, int chart_size);

/// Writes `date,position,track,artist,streams` rows, one per entry.
void write_chart_csv(std::ostream& out, const ChartDataset& dataset);

/// One song's daily counts from first to last appearance. Days on which the
/// song is not charted (or the chart is missing) hold std::nullopt.
struct DailySeries {
  SongKey key;
  Date start_day;
  std::vector<std::optional<std::int64_t>> counts;

  std::size_t length() const { return counts.size(); }
  std::size_t present_count() const;
};

DailySeries extract_song_series(const ChartDataset& dataset, const SongKey& key);

/// Consecutive chart days from first appearance during which the song is on
/// the chart every day. Calendar days with no chart neither break nor extend
/// the run.
int first_life(const ChartDataset& dataset, const SongKey& key);

struct DurationSummary {
  static constexpr std::array<int, 4> kThresholds{1, 7, 30, 365};

  std::map<int, int> histogram;  // first-life length -> number of songs
  std::size_t songs = 0;
  std::array<double, 4> fractions{};  // share of songs with first life <= threshold
};

DurationSummary duration_summary(const ChartDataset& dataset);

}  // namespace chartpulse
