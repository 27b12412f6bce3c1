#include "chartpulse/chart.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "chartpulse/csv.hpp"
#include "chartpulse/error.hpp"

namespace chartpulse {

namespace {

constexpr std::string_view kWhitespace = " \t\r\n\v\f";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kWhitespace);
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename Int>
Int parse_int(std::string_view text, std::string_view column, std::size_t line) {
  text = trim(text);
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("line " + std::to_string(line) + ": unparsable " + std::string(column) +
                    " '" + std::string(text) + "'");
  }
  return value;
}

struct Columns {
  std::size_t date = 0;
  std::size_t position = 0;
  std::size_t track = 0;
  std::size_t artist = 0;
  std::size_t streams = 0;
  std::size_t width = 0;
};

Columns locate_columns(const std::vector<std::string>& header) {
  static const std::map<std::string, std::string, std::less<>> kAliases{
      {"date", "date"},       {"position", "position"}, {"rank", "position"},
      {"track", "track"},     {"track name", "track"},  {"track_name", "track"},
      {"title", "track"},     {"song", "track"},        {"artist", "artist"},
      {"streams", "streams"},
  };
  std::map<std::string, std::size_t> found;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string name = lower(trim(header[i]));
    if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name = lower(trim(name.substr(3)));
    if (auto it = kAliases.find(name); it != kAliases.end()) {
      found.try_emplace(it->second, i);
    }
  }
  std::string missing;
  for (const char* required : {"date", "position", "track", "artist", "streams"}) {
    if (!found.contains(required)) missing += std::string(missing.empty() ? "" : ", ") + required;
  }
  if (!missing.empty()) throw DataError("header is missing required column(s): " + missing);
  return Columns{found["date"], found["position"], found["track"],
                 found["artist"], found["streams"], header.size()};
}

}  // namespace

std::string SongKey::str() const { return title + "::" + artist; }

SongKey SongKey::parse(std::string_view selector) {
  const auto sep = selector.rfind("::");
  if (sep == std::string_view::npos) return make_song_key(selector, "");
  return make_song_key(selector.substr(0, sep), selector.substr(sep + 2));
}

std::string normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw DataError("unicode normalizer unavailable");
  const auto source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw DataError("cannot normalize '" + std::string(text) + "'");
  std::string out;
  normalized.toUTF8String(out);
  return std::string(trim(out));
}

SongKey make_song_key(std::string_view title, std::string_view artist) {
  return SongKey{normalize_text(title), normalize_text(artist)};
}

std::span<const ChartEntry> ChartDataset::day_entries(std::size_t day_index) const {
  const auto n = static_cast<std::size_t>(chart_size_);
  return std::span<const ChartEntry>(entries_).subspan(day_index * n, n);
}

const std::vector<Appearance>& ChartDataset::appearances(const SongKey& key) const {
  const auto it = song_index_.find(key);
  if (it == song_index_.end()) throw DataError("song not found: " + key.str());
  return it->second;
}

ChartDataset ChartDataset::from_entries(std::vector<ChartEntry> entries, int chart_size) {
  if (chart_size < 1) throw DataError("chart size must be positive");
  for (auto& e : entries) {
    e.title = normalize_text(e.title);
    e.artist = normalize_text(e.artist);
  }
  std::stable_sort(entries.begin(), entries.end(), [](const ChartEntry& a, const ChartEntry& b) {
    return std::tie(a.date, a.position) < std::tie(b.date, b.position);
  });

  std::vector<std::string> problems;
  std::set<Date> duplicate_dates;
  std::set<Date> bad_count_dates;
  for (const auto& e : entries) {
    if (e.position < 1 || e.position > chart_size) {
      problems.push_back(format_date(e.date) + ": position " + std::to_string(e.position) +
                         " outside [1, " + std::to_string(chart_size) + "]");
    }
    if (e.streams < 0) {
      problems.push_back(format_date(e.date) + ": negative streams at position " +
                         std::to_string(e.position));
    }
  }
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].date == entries[i - 1].date && entries[i].position == entries[i - 1].position) {
      duplicate_dates.insert(entries[i].date);
    }
  }
  for (Date d : duplicate_dates) problems.push_back(format_date(d) + ": duplicate position");

  ChartDataset ds;
  ds.chart_size_ = chart_size;
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i;
    while (j < entries.size() && entries[j].date == entries[i].date) ++j;
    if (j - i != static_cast<std::size_t>(chart_size)) bad_count_dates.insert(entries[i].date);
    ds.days_.push_back(entries[i].date);
    i = j;
  }
  if (!bad_count_dates.empty()) {
    std::string msg = "dates without exactly " + std::to_string(chart_size) + " rows:";
    for (Date d : bad_count_dates) msg += " " + format_date(d);
    problems.push_back(std::move(msg));
  }
  if (!problems.empty()) {
    std::string msg = "chart validation failed";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }

  for (std::size_t d = 0; d < ds.days_.size(); ++d) {
    const auto first = d * static_cast<std::size_t>(chart_size);
    for (int p = 1; p < chart_size; ++p) {
      const auto& prev = entries[first + static_cast<std::size_t>(p) - 1];
      const auto& cur = entries[first + static_cast<std::size_t>(p)];
      if (cur.streams > prev.streams) {
        ds.warnings_.push_back(format_date(cur.date) + ": streams increase from position " +
                               std::to_string(prev.position) + " to " +
                               std::to_string(cur.position));
      }
    }
    if (d > 0) {
      for (Date gap = ds.days_[d - 1] + std::chrono::days{1}; gap < ds.days_[d];
           gap += std::chrono::days{1}) {
        ds.missing_.push_back(gap);
      }
    }
  }

  ds.entries_ = std::move(entries);
  for (std::size_t i = 0; i < ds.entries_.size(); ++i) {
    const auto& e = ds.entries_[i];
    ds.song_index_[e.key()].push_back(
        Appearance{i / static_cast<std::size_t>(chart_size), e.position, e.streams});
  }
  return ds;
}

ChartDataset parse_chart_csv(std::istream& in, int chart_size) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw DataError("empty chart file");
  const Columns cols = locate_columns(row);

  std::vector<ChartEntry> entries;
  while (reader.next(row)) {
    if (row.size() != cols.width) {
      throw DataError("line " + std::to_string(reader.line()) + ": expected " +
                      std::to_string(cols.width) + " fields, found " + std::to_string(row.size()));
    }
    ChartEntry e;
    try {
      e.date = parse_date(trim(row[cols.date]));
    } catch (const DataError& err) {
      throw DataError("line " + std::to_string(reader.line()) + ": " + err.what());
    }
    e.position = parse_int<int>(row[cols.position], "position", reader.line());
    e.title = row[cols.track];
    e.artist = row[cols.artist];
    e.streams = parse_int<std::int64_t>(row[cols.streams], "streams", reader.line());
    entries.push_back(std::move(e));
  }
  return ChartDataset::from_entries(std::move(entries), chart_size);
}

void write_chart_csv(std::ostream& out, const ChartDataset& dataset) {
  out << "date,position,track,artist,streams\n";
  for (const auto& e : dataset.entries()) {
    out << format_date(e.date) << ',' << e.position << ',' << csv_escape(e.title) << ','
        << csv_escape(e.artist) << ',' << e.streams << '\n';
  }
}

std::size_t DailySeries::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](const auto& c) { return c.has_value(); }));
}

DailySeries extract_song_series(const ChartDataset& dataset, const SongKey& key) {
  const auto& apps = dataset.appearances(key);
  const auto days = dataset.days();
  DailySeries series;
  series.key = key;
  series.start_day = days[apps.front().day_index];
  const auto span = days_between(series.start_day, days[apps.back().day_index]) + 1;
  series.counts.assign(static_cast<std::size_t>(span), std::nullopt);
  for (const auto& a : apps) {
    series.counts[static_cast<std::size_t>(days_between(series.start_day, days[a.day_index]))] =
        a.streams;
  }
  return series;
}

int first_life(const ChartDataset& dataset, const SongKey& key) {
  const auto& apps = dataset.appearances(key);
  int run = 1;
  for (std::size_t i = 1; i < apps.size() && apps[i].day_index == apps[i - 1].day_index + 1; ++i) {
    ++run;
  }
  return run;
}

DurationSummary duration_summary(const ChartDataset& dataset) {
  DurationSummary summary;
  for (const auto& [key, apps] : dataset.song_index()) {
    ++summary.histogram[first_life(dataset, key)];
    ++summary.songs;
  }
  if (summary.songs == 0) return summary;
  for (std::size_t t = 0; t < DurationSummary::kThresholds.size(); ++t) {
    int within = 0;
    for (const auto& [length, count] : summary.histogram) {
      if (length <= DurationSummary::kThresholds[t]) within += count;
    }
    summary.fractions[t] = static_cast<double>(within) / static_cast<double>(summary.songs);
  }
  return summary;
}

}  // namespace chartpulse
