#include "cli/app.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chartpulse/analytics.hpp"
#include "chartpulse/chart.hpp"
#include "chartpulse/clustering.hpp"
#include "chartpulse/csv.hpp"
#include "chartpulse/error.hpp"
#include "chartpulse/estimation.hpp"
#include "chartpulse/random.hpp"
#include "chartpulse/report.hpp"
#include "chartpulse/simulation.hpp"
#include "cli/dataset_cache.hpp"
#include "cli/manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace chartpulse::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// -- options ----------------------------------------------------------------
// Each command's options round-trip through the manifest, so every field a
// command reads must be listed in its JSON mapping.

struct IngestOptions {
  std::string input;
  int chart_size = 200;
  std::string out_dir = ".";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(IngestOptions, input, chart_size, out_dir)

struct AnalyzeOptions {
  std::string input;
  int chart_size = 200;
  std::string out_dir = ".";
  std::vector<std::string> analyses;
  bool svg = false;
  bool nonlinear = false;
  int rank = 0;  // 0 = last chart position
  int min_days = 14;
  int top = 10;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AnalyzeOptions, input, chart_size, out_dir, analyses, svg,
                                   nonlinear, rank, min_days, top)

struct FitOptions {
  std::string input;
  int chart_size = 200;
  std::string out_dir = ".";
  std::string song;
  std::string method = "mle";
  int jump_day = 0;  // 0 = none
  bool auto_jump = false;
  int min_gap = 7;
  bool from_final_peak = false;
  double delta = 1.0;
  double tol_grad = 1e-8;
  int max_iters = 500;
  int multistart = 8;
  std::uint64_t seed = 0;
  bool svg = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FitOptions, input, chart_size, out_dir, song, method, jump_day,
                                   auto_jump, min_gap, from_final_peak, delta, tol_grad, max_iters,
                                   multistart, seed, svg)

struct SimulateOptions {
  std::string params;
  int days = 300;
  double delta = 1.0;
  std::uint64_t seed = 0;
  std::string mode = "counts";
  std::string start_date = "2017-01-01";
  std::string title = "Simulated";
  std::string artist = "chartpulse";
  std::string out_dir = ".";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimulateOptions, params, days, delta, seed, mode, start_date,
                                   title, artist, out_dir)

struct ClusterOptions {
  std::string input;
  int chart_size = 200;
  std::string out_dir = ".";
  int k = 8;
  std::uint64_t seed = 0;
  int min_days = 14;
  bool standardize = true;
  int restarts = 10;
  int max_iters = 300;
  int elbow_max = 12;
  bool svg = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ClusterOptions, input, chart_size, out_dir, k, seed, min_days,
                                   standardize, restarts, max_iters, elbow_max, svg)

// -- helpers ----------------------------------------------------------------

struct OutputFile {
  std::string name;
  std::string content;
};

std::string absolute_path(const std::string& path) {
  return fs::absolute(fs::path(path)).lexically_normal().string();
}

std::vector<std::string> write_outputs(const std::string& out_dir,
                                       const std::vector<OutputFile>& files) {
  fs::create_directories(out_dir);
  std::vector<std::string> names;
  for (const auto& f : files) {
    write_file_atomic(fs::path(out_dir) / f.name, f.content);
    names.push_back(f.name);
  }
  return names;
}

void finish(const std::string& command, const std::string& id, const std::string& out_dir,
            std::vector<std::string> inputs, json options, std::uint64_t seed,
            const std::vector<OutputFile>& files, std::ostream& out) {
  RunManifest m;
  m.command = command;
  m.inputs = std::move(inputs);
  m.options = std::move(options);
  m.seed = seed;
  m.rng = std::string(Rng::kName);
  m.outputs = write_outputs(out_dir, files);
  const auto path = manifest_path(out_dir, command, id);
  write_manifest(path, m);
  for (const auto& name : m.outputs) out << "wrote " << (fs::path(out_dir) / name).string() << "\n";
  out << "manifest " << path.string() << "\n";
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string percent(double fraction) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * fraction << "%";
  return os.str();
}

std::string num(double v) { return format_number(v); }

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string slug(const std::string& text) {
  std::string s;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      s += static_cast<char>(std::tolower(c));
    } else if (!s.empty() && s.back() != '-') {
      s += '-';
    }
  }
  while (!s.empty() && s.back() == '-') s.pop_back();
  if (s.size() > 60) s.resize(60);
  return s.empty() ? "song" : s;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::uint64_t resolve_seed(const std::string& flag) {
  std::string text = flag;
  std::string source = "--seed";
  if (text.empty()) {
    if (const char* env = std::getenv("CHARTPULSE_SEED"); env && *env) {
      text = env;
      source = "CHARTPULSE_SEED";
    }
  }
  if (text.empty()) return 0;
  std::size_t used = 0;
  std::uint64_t seed = 0;
  try {
    if (text.front() == '-') throw std::invalid_argument("negative");
    seed = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw UsageError(source + " is not an unsigned integer: " + text);
  return seed;
}

// -- song selection ---------------------------------------------------------

SongKey select_song(const ChartDataset& dataset, const std::string& selector) {
  if (selector.empty()) {
    if (dataset.song_count() == 1) return dataset.song_index().begin()->first;
    throw UsageError("--song is required when the dataset has " +
                     std::to_string(dataset.song_count()) + " songs");
  }
  const SongKey wanted = SongKey::parse(selector);
  const SongKey key = make_song_key(wanted.title, wanted.artist);
  if (dataset.contains(key)) return key;
  if (selector.find("::") == std::string::npos) {
    std::vector<SongKey> by_title;
    for (const auto& [k, apps] : dataset.song_index()) {
      if (k.title == key.title) by_title.push_back(k);
    }
    if (by_title.size() == 1) return by_title.front();
    if (by_title.size() > 1) {
      std::string msg = "song title is ambiguous, use title::artist:";
      for (const auto& k : by_title) msg += "\n  " + k.str();
      throw DataError(msg);
    }
  }
  std::vector<std::pair<std::size_t, const SongKey*>> ranked;
  const std::string target = lower(key.str());
  for (const auto& [k, apps] : dataset.song_index()) {
    std::size_t d = levenshtein(target, lower(k.str()));
    if (key.artist.empty()) d = std::min(d, levenshtein(lower(key.title), lower(k.title)));
    ranked.emplace_back(d, &k);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string msg = "song not found: " + selector;
  if (!ranked.empty()) msg += "\ndid you mean:";
  for (std::size_t i = 0; i < std::min<std::size_t>(3, ranked.size()); ++i) {
    msg += "\n  " + ranked[i].second->str();
  }
  throw DataError(msg);
}

// A plain `day,count` file is accepted wherever a single song is fitted; a
// blank count marks an unobserved day.
std::optional<CountSeries> read_series_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) return std::nullopt;
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  int day_col = -1, count_col = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto name = lower(normalize_text(fields[i]));
    if (name == "day") day_col = static_cast<int>(i);
    if (name == "count") count_col = static_cast<int>(i);
    if (name == "position") return std::nullopt;
  }
  if (day_col < 0 || count_col < 0) return std::nullopt;
  std::map<int, std::int64_t> rows;
  while (reader.next(fields)) {
    const auto line = std::to_string(reader.line());
    if (fields.size() <= static_cast<std::size_t>(std::max(day_col, count_col))) {
      throw DataError("line " + line + ": missing day or count");
    }
    try {
      std::size_t used = 0;
      const auto& d = fields[static_cast<std::size_t>(day_col)];
      const int day = std::stoi(d, &used);
      if (used != d.size() || day < 1) throw std::invalid_argument(d);
      const auto& c = fields[static_cast<std::size_t>(count_col)];
      std::int64_t count = CountSeries::kAbsent;
      if (!c.empty()) {
        count = std::stoll(c, &used);
        if (used != c.size() || count < 0) throw std::invalid_argument(c);
      }
      if (!rows.emplace(day, count).second) throw DataError("line " + line + ": duplicate day");
    } catch (const std::logic_error&) {
      throw DataError("line " + line + ": bad day or count");
    }
  }
  if (rows.empty()) throw DataError(path + ": no rows");
  CountSeries series;
  series.first_day = rows.begin()->first;
  series.counts.assign(static_cast<std::size_t>(rows.rbegin()->first - series.first_day + 1),
                       CountSeries::kAbsent);
  for (const auto& [day, count] : rows) {
    series.counts[static_cast<std::size_t>(day - series.first_day)] = count;
  }
  return series;
}

// -- ingest -----------------------------------------------------------------

void run_ingest(const IngestOptions& o, std::ostream& out) {
  const ChartDataset ds = load_dataset(o.input, o.chart_size);
  const std::string id = dataset_id(o.input);
  if (ds.empty()) throw DataError(o.input + ": no chart rows");
  out << ds.day_count() << " days, " << ds.song_count() << " songs, "
      << format_date(ds.days().front()) << " .. " << format_date(ds.days().back()) << "\n";
  if (!ds.missing_dates().empty()) {
    out << ds.missing_dates().size() << " calendar days without a chart\n";
  }
  for (const auto& w : ds.warnings()) out << "warning: " << w << "\n";
  finish("ingest", id, o.out_dir, {o.input}, o, 0,
         {{id + std::string(kCacheExtension), serialize_dataset(ds)}}, out);
}

// -- analyze ----------------------------------------------------------------

struct AnalysisContext {
  const ChartDataset& ds;
  const AnalyzeOptions& opt;
  std::string id;
  std::ostream& out;
  std::vector<OutputFile>& files;

  void emit(const std::string& name, const std::string& csv, const SvgPlot* plot) const {
    files.push_back({name + "_" + id + ".csv", csv});
    if (opt.svg && plot) files.push_back({name + "_" + id + ".svg", plot->render()});
  }
};

std::vector<double> ranks_axis(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
  return x;
}

PowerLawFit power_law_for(const RankProfile& profile, bool nonlinear) {
  return nonlinear ? fit_power_law_nonlinear(profile) : fit_power_law(profile);
}

std::string power_law_comment(const PowerLawFit& fit, bool nonlinear) {
  return "# power_law scale=" + num(fit.scale) + " exponent=" + num(fit.exponent) +
         " r_squared=" + num(fit.r_squared) + " method=" + (nonlinear ? "nonlinear" : "log-log") +
         "\n";
}

void analysis_rank_stats(const AnalysisContext& c) {
  const auto profile = rank_stream_stats(c.ds, Exec::parallel);
  const auto fit = power_law_for(profile, c.opt.nonlinear);
  std::ostringstream csv;
  csv << "# days=" << profile.samples_per_rank << "\n" << power_law_comment(fit, c.opt.nonlinear);
  csv << "rank,mean,stddev\n";
  for (std::size_t r = 0; r < profile.mean.size(); ++r) {
    csv << r + 1 << ',' << num(profile.mean[r]) << ',' << num(profile.stddev[r]) << "\n";
  }
  std::vector<double> hi(profile.mean.size()), lo(profile.mean.size());
  for (std::size_t r = 0; r < hi.size(); ++r) {
    hi[r] = profile.mean[r] + profile.stddev[r];
    lo[r] = profile.mean[r] - profile.stddev[r];
  }
  SvgPlot plot("Daily streams by rank", "rank", "streams");
  plot.add_series("mean", ranks_axis(hi.size()), profile.mean);
  plot.add_series("mean + sd", ranks_axis(hi.size()), hi);
  plot.add_series("mean - sd", ranks_axis(lo.size()), lo);
  c.out << "rank-stats: " << profile.mean.size() << " ranks over " << profile.samples_per_rank
        << " days\n";
  c.emit("rank-stats", csv.str(), &plot);
}

void analysis_power_law(const AnalysisContext& c) {
  const auto profile = rank_stream_stats(c.ds, Exec::parallel);
  const auto fit = power_law_for(profile, c.opt.nonlinear);
  std::ostringstream csv;
  csv << "# scale=" << num(fit.scale) << "\n# exponent=" << num(fit.exponent)
      << "\n# r_squared=" << num(fit.r_squared)
      << "\n# method=" << (c.opt.nonlinear ? "nonlinear" : "log-log") << "\n";
  csv << "rank,mean,fitted\n";
  std::vector<double> fitted(profile.mean.size());
  for (std::size_t r = 0; r < profile.mean.size(); ++r) {
    fitted[r] = fit.scale * std::pow(static_cast<double>(r + 1), -fit.exponent);
    csv << r + 1 << ',' << num(profile.mean[r]) << ',' << num(fitted[r]) << "\n";
  }
  SvgPlot plot("Mean streams by rank with power-law fit", "rank", "streams");
  plot.add_series("mean", ranks_axis(fitted.size()), profile.mean, SvgPlot::Style::points);
  plot.add_series("a * rank^-b", ranks_axis(fitted.size()), fitted);
  plot.set_log_y(true);
  c.out << "power-law: a = " << fmt(fit.scale, 6) << ", b = " << fmt(fit.exponent, 6)
        << ", R^2 = " << fmt(fit.r_squared, 5) << (c.opt.nonlinear ? " (nonlinear)" : " (log-log)")
        << "\n";
  c.emit("power-law", csv.str(), &plot);
}

void analysis_unique_songs(const AnalysisContext& c) {
  const auto unique = unique_songs_per_rank(c.ds);
  std::ostringstream csv;
  csv << "rank,unique_songs\n";
  std::vector<double> y;
  for (std::size_t r = 0; r < unique.size(); ++r) {
    csv << r + 1 << ',' << unique[r] << "\n";
    y.push_back(static_cast<double>(unique[r]));
  }
  SvgPlot plot("Distinct songs per rank", "rank", "songs");
  plot.add_series("songs", ranks_axis(y.size()), y);
  c.out << "unique-songs: " << (unique.empty() ? 0 : unique.front()) << " at rank 1, "
        << (unique.empty() ? 0 : unique.back()) << " at rank " << unique.size() << "\n";
  c.emit("unique-songs", csv.str(), &plot);
}

void analysis_number_one(const AnalysisContext& c) {
  const auto timeline = number_one_timeline(c.ds);
  std::set<SongKey> distinct;
  std::size_t changes = 0;
  std::int64_t max_streams = 0;
  std::ostringstream rows;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    const auto& d = timeline[i];
    distinct.insert(d.song);
    changes += d.change_point ? 1 : 0;
    max_streams = std::max(max_streams, d.streams);
    rows << format_date(d.date) << ',' << csv_escape(d.song.title) << ','
         << csv_escape(d.song.artist) << ',' << d.streams << ',' << (d.change_point ? 1 : 0) << "\n";
    x.push_back(static_cast<double>(i + 1));
    y.push_back(static_cast<double>(d.streams));
  }
  std::ostringstream csv;
  csv << "# distinct_songs=" << distinct.size() << "\n# change_points=" << changes
      << "\n# max_streams=" << max_streams << "\n";
  csv << "date,track,artist,streams,change_point\n" << rows.str();
  SvgPlot plot("Streams of the number-one song", "chart day", "streams");
  plot.add_series("rank 1", x, y);
  c.out << "number-one: " << distinct.size() << " distinct songs, " << changes
        << " changes, max " << max_streams << " streams\n";
  c.emit("number-one", csv.str(), &plot);
}

void analysis_durations(const AnalysisContext& c) {
  const auto summary = duration_summary(c.ds);
  std::ostringstream csv;
  csv << "# songs=" << summary.songs << "\n";
  for (std::size_t i = 0; i < summary.fractions.size(); ++i) {
    csv << "# fraction_le_" << DurationSummary::kThresholds[i] << "=" << num(summary.fractions[i])
        << "\n";
  }
  csv << "first_life,songs\n";
  std::vector<double> x, y;
  for (const auto& [len, songs] : summary.histogram) {
    csv << len << ',' << songs << "\n";
    x.push_back(len);
    y.push_back(songs);
  }
  SvgPlot plot("First-life lengths", "days", "songs");
  plot.add_series("songs", x, y, SvgPlot::Style::points);
  plot.set_log_y(true);
  c.out << "durations: " << summary.songs << " songs; first life <= 1 day " << percent(summary.fractions[0])
        << ", <= 1 week " << percent(summary.fractions[1]) << ", <= 30 days "
        << percent(summary.fractions[2]) << ", <= 365 days " << percent(summary.fractions[3]) << "\n";
  c.emit("durations", csv.str(), &plot);
}

void analysis_first_life(const AnalysisContext& c) {
  const auto peaks = peak_ranks(c.ds);
  struct Row {
    const SongKey* key;
    int life;
    int peak;
  };
  std::vector<Row> rows;
  for (const auto& [key, apps] : c.ds.song_index()) {
    rows.push_back({&key, first_life(c.ds, key), peaks.at(key)});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.life > b.life; });
  std::ostringstream csv;
  csv << "track,artist,first_life,peak_rank\n";
  for (const auto& r : rows) {
    csv << csv_escape(r.key->title) << ',' << csv_escape(r.key->artist) << ',' << r.life << ','
        << r.peak << "\n";
  }
  c.out << "first-life: longest runs\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(static_cast<std::size_t>(c.opt.top), rows.size()); ++i) {
    c.out << "  " << rows[i].life << "  " << rows[i].key->title << " - " << rows[i].key->artist
          << "\n";
  }
  c.emit("first-life", csv.str(), nullptr);
}

void analysis_duration_by_peak(const AnalysisContext& c) {
  const auto d = duration_by_peak_rank(c.ds);
  std::ostringstream csv;
  csv << "# scale=" << num(d.scale) << "\n# rate=" << num(d.rate)
      << "\n# r_squared=" << num(d.r_squared) << "\n# fitted=" << (d.fitted ? 1 : 0) << "\n";
  csv << "peak_rank,songs,mean_first_life,fitted\n";
  std::vector<double> x, y, f;
  for (const auto& g : d.groups) {
    const double fitted = d.fitted ? d.scale * std::exp(-d.rate * g.peak_rank) : 0.0;
    csv << g.peak_rank << ',' << g.songs << ',' << num(g.mean_first_life) << ',' << num(fitted)
        << "\n";
    x.push_back(g.peak_rank);
    y.push_back(g.mean_first_life);
    f.push_back(fitted);
  }
  SvgPlot plot("Mean first life by peak rank", "peak rank", "days");
  plot.add_series("mean first life", x, y, SvgPlot::Style::points);
  if (d.fitted) plot.add_series("c * exp(-d * rank)", x, f);
  c.out << "duration-by-peak:";
  if (!d.groups.empty() && d.groups.front().peak_rank == 1) {
    c.out << " peak rank 1 mean " << fmt(d.groups.front().mean_first_life) << " days;";
  }
  if (d.fitted) {
    c.out << " c = " << fmt(d.scale, 5) << ", d = " << fmt(d.rate, 5) << ", R^2 = "
          << fmt(d.r_squared, 4) << "\n";
  } else {
    c.out << " too few groups to fit\n";
  }
  c.emit("duration-by-peak", csv.str(), &plot);
}

int analysis_rank(const AnalysisContext& c) {
  const int rank = c.opt.rank == 0 ? c.ds.chart_size() : c.opt.rank;
  if (rank < 1 || rank > c.ds.chart_size()) {
    throw UsageError("--rank must be in [1, " + std::to_string(c.ds.chart_size()) + "]");
  }
  return rank;
}

void analysis_rank_series(const AnalysisContext& c) {
  const int rank = analysis_rank(c);
  std::ostringstream csv;
  csv << "# rank=" << rank << "\ndate,weekday,streams\n";
  std::vector<double> x, y;
  for (std::size_t i = 0; i < c.ds.day_count(); ++i) {
    const auto& e = c.ds.day_entries(i)[static_cast<std::size_t>(rank - 1)];
    csv << format_date(e.date) << ',' << weekday_name(weekday_index(e.date)) << ',' << e.streams
        << "\n";
    x.push_back(static_cast<double>(days_between(c.ds.days().front(), e.date) + 1));
    y.push_back(static_cast<double>(e.streams));
  }
  SvgPlot plot("Streams at rank " + std::to_string(rank), "calendar day", "streams");
  plot.add_series("rank " + std::to_string(rank), x, y);
  c.out << "rank-series: rank " << rank << " over " << c.ds.day_count() << " days\n";
  c.emit("rank-series", csv.str(), &plot);
}

void analysis_weekday(const AnalysisContext& c) {
  const int rank = analysis_rank(c);
  const auto profile = day_of_week_profile(c.ds, rank);
  std::ostringstream csv;
  csv << "# rank=" << rank << "\nweekday,mean_streams,days\n";
  std::vector<double> x, y;
  std::size_t best = 0;
  for (std::size_t w = 0; w < 7; ++w) {
    csv << weekday_name(static_cast<unsigned>(w)) << ',' << num(profile.mean[w]) << ','
        << profile.days[w] << "\n";
    x.push_back(static_cast<double>(w));
    y.push_back(profile.mean[w]);
    if (profile.mean[w] > profile.mean[best]) best = w;
  }
  SvgPlot plot("Mean streams at rank " + std::to_string(rank) + " by weekday (0 = Sunday)",
               "weekday", "streams");
  plot.add_series("mean", x, y);
  c.out << "weekday: rank " << rank << " peaks on " << weekday_name(static_cast<unsigned>(best))
        << "\n";
  c.emit("weekday", csv.str(), &plot);
}

void analysis_decay_by_peak(const AnalysisContext& c) {
  const auto features = build_features(c.ds, c.opt.min_days, Exec::parallel);
  std::map<SongKey, RegressionResult> fits;
  for (const auto& f : features.features) {
    RegressionResult r;
    r.slope = -f.decay_rate;
    r.decay_rate = f.decay_rate;
    r.r_squared = f.r_squared;
    fits.emplace(f.song, r);
  }
  const auto groups = decay_rate_by_peak_rank(c.ds, fits);
  // song-weighted mean of |mean slope| over three bands of peak rank
  auto band = [&](int lo, int hi) {
    double sum = 0.0, n = 0.0;
    for (const auto& g : groups) {
      if (g.peak_rank < lo || g.peak_rank > hi) continue;
      sum += std::abs(g.mean_slope) * static_cast<double>(g.songs);
      n += static_cast<double>(g.songs);
    }
    return n > 0.0 ? sum / n : 0.0;
  };
  const int n = c.ds.chart_size();
  const int top_hi = std::max(1, n / 20), mid_lo = std::max(1, 3 * n / 20),
            mid_hi = std::max(1, 13 * n / 20), tail_lo = std::max(1, 3 * n / 4);
  std::ostringstream csv;
  csv << "# songs=" << features.features.size() << " min_days=" << c.opt.min_days << "\n";
  csv << "# mean_abs_slope ranks 1-" << top_hi << "=" << num(band(1, top_hi)) << "\n";
  csv << "# mean_abs_slope ranks " << mid_lo << "-" << mid_hi << "=" << num(band(mid_lo, mid_hi))
      << "\n";
  csv << "# mean_abs_slope ranks " << tail_lo << "-" << n << "=" << num(band(tail_lo, n)) << "\n";
  csv << "peak_rank,songs,mean_slope,variance\n";
  std::vector<double> x, y;
  for (const auto& g : groups) {
    csv << g.peak_rank << ',' << g.songs << ',' << num(g.mean_slope) << ',' << num(g.variance)
        << "\n";
    x.push_back(g.peak_rank);
    y.push_back(g.mean_slope);
  }
  SvgPlot plot("Mean log-linear slope by peak rank", "peak rank", "slope per day");
  plot.add_series("mean slope", x, y, SvgPlot::Style::points);
  c.out << "decay-by-peak: " << fits.size() << " songs, mean |slope| ranks 1-" << top_hi << " "
        << fmt(band(1, top_hi)) << ", " << mid_lo << "-" << mid_hi << " "
        << fmt(band(mid_lo, mid_hi)) << ", " << tail_lo << "-" << n << " " << fmt(band(tail_lo, n))
        << "\n";
  c.emit("decay-by-peak", csv.str(), &plot);
}

using AnalysisFn = void (*)(const AnalysisContext&);

const std::vector<std::pair<std::string, AnalysisFn>>& analyses() {
  static const std::vector<std::pair<std::string, AnalysisFn>> table{
      {"rank-stats", analysis_rank_stats},
      {"power-law", analysis_power_law},
      {"unique-songs", analysis_unique_songs},
      {"number-one", analysis_number_one},
      {"durations", analysis_durations},
      {"first-life", analysis_first_life},
      {"duration-by-peak", analysis_duration_by_peak},
      {"rank-series", analysis_rank_series},
      {"weekday", analysis_weekday},
      {"decay-by-peak", analysis_decay_by_peak},
  };
  return table;
}

std::string analysis_names() {
  std::string names;
  for (const auto& [name, fn] : analyses()) names += (names.empty() ? "" : ", ") + name;
  return names;
}

void run_analyze(const AnalyzeOptions& o, std::ostream& out) {
  std::vector<std::pair<std::string, AnalysisFn>> selected;
  std::vector<std::string> wanted = o.analyses;
  const bool all = wanted.empty() || std::find(wanted.begin(), wanted.end(), "all") != wanted.end();
  if (all) {
    wanted.clear();
    for (const auto& [name, fn] : analyses()) wanted.push_back(name);
  }
  for (const auto& name : wanted) {
    const auto it = std::find_if(analyses().begin(), analyses().end(),
                                 [&](const auto& a) { return a.first == name; });
    if (it == analyses().end()) {
      throw UsageError("unknown analysis '" + name + "'; available: " + analysis_names());
    }
    if (std::find(selected.begin(), selected.end(), *it) == selected.end()) selected.push_back(*it);
  }
  const ChartDataset ds = load_dataset(o.input, o.chart_size);
  if (ds.empty()) throw DataError(o.input + ": no chart rows");
  const std::string id = dataset_id(o.input);
  std::vector<OutputFile> files;
  const AnalysisContext ctx{ds, o, id, out, files};
  for (const auto& [name, fn] : selected) {
    try {
      fn(ctx);
    } catch (const std::invalid_argument& e) {
      // the dataset is too small for this analysis
      if (!all) throw DataError(name + ": " + e.what());
      out << name << ": skipped, " << e.what() << "\n";
    }
  }
  finish("analyze", id, o.out_dir, {o.input}, o, 0, files, out);
}

// -- fit --------------------------------------------------------------------

struct LoadedSeries {
  CountSeries series;
  SongKey key;
  std::optional<Date> start;
};

LoadedSeries load_fit_series(const FitOptions& o) {
  if (auto plain = read_series_csv(o.input)) {
    return {std::move(*plain), SongKey{dataset_id(o.input), ""}, std::nullopt};
  }
  const ChartDataset ds = load_dataset(o.input, o.chart_size);
  const SongKey key = select_song(ds, o.song);
  const DailySeries daily = extract_song_series(ds, key);
  return {to_count_series(daily), key, daily.start_day};
}

json window_json(const RegressionWindow& w) {
  return json{{"first_day", w.first_day}, {"last_day", w.last_day}};
}

void run_fit(const FitOptions& o, std::ostream& out) {
  if (o.method != "mle" && o.method != "regression") {
    throw UsageError("--method must be mle or regression, got '" + o.method + "'");
  }
  if (o.method == "regression" && (o.jump_day != 0 || o.auto_jump)) {
    throw UsageError("--jump-day and --auto-jump apply to --method mle");
  }
  if (o.method == "mle" && o.from_final_peak) {
    throw UsageError("--from-final-peak applies to --method regression");
  }
  if (o.jump_day != 0 && o.auto_jump) throw UsageError("use either --jump-day or --auto-jump");
  if (!(o.delta > 0.0) || !std::isfinite(o.delta)) throw UsageError("--delta must be positive");

  const LoadedSeries loaded = load_fit_series(o);
  const CountSeries& series = loaded.series;
  const std::string id = dataset_id(o.input);
  const std::string run_id = id + "_" + slug(loaded.key.title + " " + loaded.key.artist);
  const std::string name = "fit_" + run_id;

  json report{{"song", {{"title", loaded.key.title}, {"artist", loaded.key.artist}}},
              {"method", o.method},
              {"delta", o.delta},
              {"first_day", series.first_day},
              {"last_day", series.last_day()},
              {"observed_days", series.observed_days()},
              {"total_count", series.total()}};
  if (loaded.start) report["start_date"] = format_date(*loaded.start);

  std::vector<double> fitted(series.counts.size(), 0.0);
  std::vector<double> days(series.counts.size());
  for (std::size_t k = 0; k < days.size(); ++k) days[k] = series.first_day + static_cast<double>(k);

  if (o.method == "regression") {
    const auto window = o.from_final_peak ? RegressionWindow::from_final_peak(series)
                                          : RegressionWindow::full(series);
    const auto r = fit_log_linear(series, window);
    report["regression"] = {{"slope", r.slope},
                            {"intercept", r.intercept},
                            {"decay_rate", r.decay_rate},
                            {"r_squared", r.r_squared},
                            {"degenerate", r.degenerate},
                            {"n_points", r.n_points},
                            {"window", window_json(r.window)}};
    for (std::size_t k = 0; k < days.size(); ++k) {
      fitted[k] = (days[k] >= r.window.first_day && days[k] <= r.window.last_day)
                      ? std::exp(r.intercept + r.slope * days[k])
                      : 0.0;
    }
    out << loaded.key.str() << ": decay rate " << fmt(r.decay_rate, 6) << " per day, R^2 "
        << fmt(r.r_squared, 4) << " over days " << r.window.first_day << ".." << r.window.last_day
        << "\n";
  } else {
    const int T = series.last_day();
    std::vector<int> jump_days{1};
    if (o.jump_day != 0) {
      if (o.jump_day < 2 || o.jump_day > T) {
        throw UsageError("--jump-day must be in [2, " + std::to_string(T) + "]");
      }
      jump_days.push_back(o.jump_day);
    }
    if (o.auto_jump) {
      const auto detected = detect_jump_time(series, o.min_gap);
      if (detected && *detected > 1) {
        jump_days.push_back(*detected);
        out << "detected jump on day " << *detected << "\n";
      } else {
        out << "no jump detected, fitting a single event\n";
      }
    }
    FitConfig cfg;
    cfg.delta = o.delta;
    cfg.jump_times.clear();
    for (int d : jump_days) cfg.jump_times.push_back(o.delta * (d - 1));
    cfg.tol_grad = o.tol_grad;
    cfg.max_iters = o.max_iters;
    cfg.multistart = o.multistart;
    cfg.seed = o.seed;
    const auto r = fit_mle(series, cfg);
    report["mle"] = {{"params", r.params},
                     {"jump_days", jump_days},
                     {"log_likelihood", r.log_likelihood},
                     {"grad_norm", r.grad_norm},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"restart_index", r.restart_index},
                     {"warnings", r.warnings},
                     {"config",
                      {{"tol_grad", o.tol_grad},
                       {"max_iters", o.max_iters},
                       {"multistart", o.multistart},
                       {"seed", o.seed}}}};
    const auto expected = expected_daily_counts(r.params, DayGrid{o.delta, T});
    for (std::size_t k = 0; k < days.size(); ++k) {
      fitted[k] = expected[static_cast<std::size_t>(series.first_day - 1) + k];
    }
    out << loaded.key.str() << ": lambda " << fmt(r.params.baseline, 6);
    for (const auto& e : r.params.events) {
      out << ", (a " << fmt(e.time) << ", theta " << fmt(e.size, 6) << ", beta " << fmt(e.decay, 5)
          << ")";
    }
    out << "; " << (r.converged ? "converged" : "NOT converged") << " after " << r.iterations
        << " iterations\n";
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  }

  std::ostringstream csv;
  csv << "day,date,observed,fitted\n";
  std::vector<double> ox, oy;
  for (std::size_t k = 0; k < days.size(); ++k) {
    csv << series.first_day + static_cast<int>(k) << ',';
    if (loaded.start) csv << format_date(*loaded.start + std::chrono::days(static_cast<int>(k)));
    csv << ',';
    if (series.observed(k)) {
      csv << series.counts[k];
      ox.push_back(days[k]);
      oy.push_back(static_cast<double>(series.counts[k]));
    }
    csv << ',' << num(fitted[k]) << "\n";
  }
  std::vector<OutputFile> files{{name + ".json", report.dump(2) + "\n"}, {name + ".csv", csv.str()}};
  if (o.svg) {
    SvgPlot plot(loaded.key.str(), "day", "count");
    plot.add_series("observed", ox, oy, SvgPlot::Style::points);
    plot.add_series(o.method == "mle" ? "expected" : "log-linear fit", days, fitted);
    files.push_back({name + ".svg", plot.render()});
  }
  finish("fit", run_id, o.out_dir, {o.input}, o, o.seed, files, out);
}

// -- simulate ---------------------------------------------------------------

IntensityParams read_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read params " + path);
  try {
    return json::parse(in).get<IntensityParams>();
  } catch (const json::exception& e) {
    throw DataError("malformed params " + path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError("invalid params " + path + ": " + e.what());
  }
}

void run_simulate(const SimulateOptions& o, std::ostream& out) {
  if (o.mode != "counts" && o.mode != "events") {
    throw UsageError("--mode must be counts or events, got '" + o.mode + "'");
  }
  const DayGrid grid{o.delta, o.days};
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Date start = parse_date(o.start_date);
  const IntensityParams params = read_params(o.params);
  const std::string id = dataset_id(o.params);
  std::ostringstream csv;
  std::string name;
  if (o.mode == "counts") {
    const auto counts = simulate_daily_counts(params, SimConfig{grid, o.seed}, Exec::parallel);
    std::vector<ChartEntry> entries;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      entries.push_back({start + std::chrono::days(static_cast<int>(i)), 1, o.title, o.artist,
                         counts[i]});
    }
    write_chart_csv(csv, ChartDataset::from_entries(std::move(entries), 1));
    name = "simulate_" + id + ".csv";
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    out << "simulated " << counts.size() << " days, " << total << " streams\n";
  } else {
    const auto times = simulate_event_times(params, o.delta * o.days, o.seed);
    csv << "time\n";
    for (double t : times) csv << num(t) << "\n";
    name = "simulate-events_" + id + ".csv";
    out << "simulated " << times.size() << " events on [0, " << num(o.delta * o.days) << ")\n";
  }
  finish("simulate", id, o.out_dir, {o.params}, o, o.seed, {{name, csv.str()}}, out);
}

// -- cluster ----------------------------------------------------------------

void run_cluster(const ClusterOptions& o, std::ostream& out) {
  if (o.k < 1) throw UsageError("--k must be >= 1");
  if (o.min_days < 2) throw UsageError("--min-days must be >= 2");
  if (o.restarts < 1 || o.max_iters < 1) throw UsageError("--restarts and --max-iters must be >= 1");
  const ChartDataset ds = load_dataset(o.input, o.chart_size);
  const std::string id = dataset_id(o.input);
  const auto features = build_features(ds, o.min_days, Exec::parallel);
  const auto& fv = features.features;
  if (fv.size() < static_cast<std::size_t>(o.k)) {
    throw DataError("k = " + std::to_string(o.k) + " is too large: only " +
                    std::to_string(fv.size()) + " songs have " + std::to_string(o.min_days) +
                    " or more usable days");
  }
  const bool scaled = o.standardize && fv.size() >= 2;
  const StandardizedFeatures points = scaled ? standardize(fv) : unscaled(fv);
  const auto distinct = distinct_point_count(points.points);
  if (distinct < static_cast<std::size_t>(o.k)) {
    throw DataError("k = " + std::to_string(o.k) + " is too large: only " +
                    std::to_string(distinct) + " distinct feature points");
  }
  const auto result = kmeans_best_of(points.points, o.k, o.seed, o.restarts, o.max_iters,
                                     Exec::parallel);
  const auto report = cluster_report(result, fv, points.transform);
  const auto elbow = elbow_curve(points.points, 2, o.elbow_max, o.seed, o.restarts, o.max_iters);

  std::ostringstream assign;
  assign << "track,artist,decay_rate,r_squared,cluster\n";
  for (std::size_t i = 0; i < fv.size(); ++i) {
    assign << csv_escape(fv[i].song.title) << ',' << csv_escape(fv[i].song.artist) << ','
           << num(fv[i].decay_rate) << ',' << num(fv[i].r_squared) << ',' << result.assignments[i]
           << "\n";
  }

  json clusters = json::array();
  for (const auto& s : report) {
    const auto& z = result.centroids[static_cast<std::size_t>(s.cluster)];
    std::size_t growing = 0;
    for (std::size_t i = 0; i < fv.size(); ++i) {
      if (result.assignments[i] == s.cluster && fv[i].decay_rate < 0.0) ++growing;
    }
    clusters.push_back({{"cluster", s.cluster},
                        {"size", s.members.size()},
                        {"growing", growing},
                        {"centroid", {{"decay_rate", s.centroid[0]}, {"r_squared", s.centroid[1]}}},
                        {"centroid_model_space", {z[0], z[1]}},
                        {"decay_rate_range", {s.rate_min, s.rate_max}},
                        {"r_squared_range", {s.r_squared_min, s.r_squared_max}}});
  }
  json centroids{{"k", o.k},
                 {"seed", o.seed},
                 {"standardized", scaled},
                 {"transform",
                  {{"mean", points.transform.mean},
                   {"stddev", points.transform.stddev},
                   {"degenerate", points.transform.degenerate}}},
                 {"inertia", result.inertia},
                 {"iterations", result.iterations},
                 {"songs", fv.size()},
                 {"excluded", features.excluded.size()},
                 {"clusters", clusters}};

  std::ostringstream elbow_csv;
  elbow_csv << "k,inertia\n";
  for (const auto& e : elbow) elbow_csv << e.k << ',' << num(e.inertia) << "\n";

  std::vector<OutputFile> files{{"cluster-assignments_" + id + ".csv", assign.str()},
                                {"cluster-centroids_" + id + ".json", centroids.dump(2) + "\n"},
                                {"cluster-elbow_" + id + ".csv", elbow_csv.str()}};
  if (o.svg) {
    SvgPlot plot("Songs by decay rate and R^2", "decay rate", "R^2");
    for (int c = 0; c < o.k; ++c) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < fv.size(); ++i) {
        if (result.assignments[i] != c) continue;
        x.push_back(fv[i].decay_rate);
        y.push_back(fv[i].r_squared);
      }
      plot.add_series("cluster " + std::to_string(c), x, y, SvgPlot::Style::points);
    }
    files.push_back({"cluster_" + id + ".svg", plot.render()});
  }

  out << fv.size() << " songs clustered (" << features.excluded.size() << " excluded), k = " << o.k
      << ", inertia " << fmt(result.inertia, 6) << "\n";
  for (const auto& c : clusters) {
    const std::size_t size = c["size"];
    const std::size_t growing = c["growing"];
    out << "cluster " << c["cluster"].get<int>() << ": " << size << " songs, centroid rate "
        << fmt(c["centroid"]["decay_rate"].get<double>()) << ", R^2 "
        << fmt(c["centroid"]["r_squared"].get<double>()) << (2 * growing > size ? ", mostly growing" : "")
        << "\n";
  }
  finish("cluster", id, o.out_dir, {o.input}, o, o.seed, files, out);
}

// -- replay -----------------------------------------------------------------

template <typename Options>
Options options_from(const RunManifest& m, const std::string& out_dir) {
  Options o;
  try {
    o = m.options.get<Options>();
  } catch (const json::exception& e) {
    throw DataError("manifest options for '" + m.command + "' are malformed: " + e.what());
  }
  if (!out_dir.empty()) o.out_dir = absolute_path(out_dir);
  return o;
}

void run_replay(const std::string& path, const std::string& out_dir, std::ostream& out) {
  const RunManifest m = read_manifest(path);
  if (m.version != kToolVersion) {
    out << "note: manifest written by version " << m.version << ", replaying with "
        << kToolVersion << "\n";
  }
  if (m.rng != Rng::kName) {
    throw DataError("manifest uses generator '" + m.rng + "', this build provides '" +
                    std::string(Rng::kName) + "'");
  }
  if (m.command == "ingest") {
    run_ingest(options_from<IngestOptions>(m, out_dir), out);
  } else if (m.command == "analyze") {
    run_analyze(options_from<AnalyzeOptions>(m, out_dir), out);
  } else if (m.command == "fit") {
    run_fit(options_from<FitOptions>(m, out_dir), out);
  } else if (m.command == "simulate") {
    run_simulate(options_from<SimulateOptions>(m, out_dir), out);
  } else if (m.command == "cluster") {
    run_cluster(options_from<ClusterOptions>(m, out_dir), out);
  } else {
    throw DataError("manifest names unknown command '" + m.command + "'");
  }
}

// -- command line -----------------------------------------------------------

void add_dataset_flags(CLI::App* cmd, std::string& input, int& chart_size, std::string& out_dir) {
  cmd->add_option("--input,-i", input, "chart CSV or dataset cache")->required();
  cmd->add_option("--chart-size", chart_size, "rows per chart day")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir,-o", out_dir, "output directory")->capture_default_str();
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chart stream analytics: ingest, analyze, fit, simulate and cluster daily charts",
               "chartpulse"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "validate a chart CSV and write a dataset cache");
  add_dataset_flags(c_ingest, ingest.input, ingest.chart_size, ingest.out_dir);

  AnalyzeOptions analyze;
  auto* c_analyze = app.add_subcommand("analyze", "write per-rank and per-song chart analyses");
  add_dataset_flags(c_analyze, analyze.input, analyze.chart_size, analyze.out_dir);
  c_analyze->add_option("--analysis,-a", analyze.analyses,
                        "analysis name, repeatable; default all of: " + analysis_names());
  c_analyze->add_flag("--svg", analyze.svg, "also write SVG plots");
  c_analyze->add_flag("--nonlinear", analyze.nonlinear,
                      "fit the power law by least squares on raw means");
  c_analyze->add_option("--rank", analyze.rank, "rank for rank-series and weekday (default: last)");
  c_analyze->add_option("--min-days", analyze.min_days, "minimum charted days for decay-by-peak")
      ->capture_default_str();
  c_analyze->add_option("--top", analyze.top, "rows printed by first-life")->capture_default_str();

  FitOptions fit;
  std::string fit_seed;
  auto* c_fit = app.add_subcommand("fit", "fit one song's daily counts");
  add_dataset_flags(c_fit, fit.input, fit.chart_size, fit.out_dir);
  c_fit->add_option("--song,-s", fit.song, "song as \"title::artist\"");
  c_fit->add_option("--method", fit.method, "mle or regression")
      ->capture_default_str()
      ->check(CLI::IsMember({"mle", "regression"}));
  auto* jump = c_fit->add_option("--jump-day", fit.jump_day, "model day of a second jump event");
  auto* auto_jump = c_fit->add_flag("--auto-jump", fit.auto_jump,
                                    "detect a second jump from the largest relative increase");
  jump->excludes(auto_jump);
  c_fit->add_option("--min-gap", fit.min_gap, "days skipped before searching for a jump")
      ->capture_default_str();
  c_fit->add_flag("--from-final-peak", fit.from_final_peak,
                  "regress from the series maximum onwards");
  c_fit->add_option("--delta", fit.delta, "day length in model time")->capture_default_str();
  c_fit->add_option("--tol-grad", fit.tol_grad, "convergence threshold")->capture_default_str();
  c_fit->add_option("--max-iters", fit.max_iters)->capture_default_str();
  c_fit->add_option("--multistart", fit.multistart, "random initializations")->capture_default_str();
  c_fit->add_option("--seed", fit_seed, "seed (default: CHARTPULSE_SEED or 0)");
  c_fit->add_flag("--svg", fit.svg, "also write an SVG plot");

  SimulateOptions sim;
  std::string sim_seed;
  auto* c_sim = app.add_subcommand("simulate", "draw counts or event times from model parameters");
  c_sim->add_option("--params,-p", sim.params,
                    "JSON {\"lambda\": .., \"events\": [{\"a\", \"theta\", \"beta\"}]}")
      ->required();
  c_sim->add_option("--days,-T", sim.days, "number of days")->capture_default_str();
  c_sim->add_option("--delta", sim.delta, "day length in model time")->capture_default_str();
  c_sim->add_option("--seed", sim_seed, "seed (default: CHARTPULSE_SEED or 0)");
  c_sim->add_option("--mode", sim.mode, "counts or events")
      ->capture_default_str()
      ->check(CLI::IsMember({"counts", "events"}));
  c_sim->add_option("--start-date", sim.start_date, "date of day 1 in counts mode")
      ->capture_default_str();
  c_sim->add_option("--title", sim.title, "track name in counts mode")->capture_default_str();
  c_sim->add_option("--artist", sim.artist, "artist name in counts mode")->capture_default_str();
  c_sim->add_option("--out-dir,-o", sim.out_dir, "output directory")->capture_default_str();

  ClusterOptions cluster;
  std::string cluster_seed;
  bool no_standardize = false;
  auto* c_cluster = app.add_subcommand("cluster", "k-means on per-song decay rate and R^2");
  add_dataset_flags(c_cluster, cluster.input, cluster.chart_size, cluster.out_dir);
  c_cluster->add_option("--k,-k", cluster.k, "number of clusters")->capture_default_str();
  c_cluster->add_option("--seed", cluster_seed, "seed (default: CHARTPULSE_SEED or 0)");
  c_cluster->add_option("--min-days", cluster.min_days, "minimum usable days per song")
      ->capture_default_str();
  c_cluster->add_flag("--no-standardize", no_standardize, "cluster on raw features");
  c_cluster->add_option("--restarts", cluster.restarts, "k-means seeds tried")->capture_default_str();
  c_cluster->add_option("--max-iters", cluster.max_iters)->capture_default_str();
  c_cluster->add_option("--elbow-max", cluster.elbow_max, "largest k in the elbow curve")
      ->capture_default_str();
  c_cluster->add_flag("--svg", cluster.svg, "also write an SVG scatter plot");

  std::string replay_path, replay_out;
  auto* c_replay = app.add_subcommand("replay", "rerun a command from its manifest");
  c_replay->add_option("manifest", replay_path, "manifest JSON")->required();
  c_replay->add_option("--out-dir,-o", replay_out, "write outputs here instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  if (c_ingest->parsed()) {
    ingest.input = absolute_path(ingest.input);
    ingest.out_dir = absolute_path(ingest.out_dir);
    run_ingest(ingest, out);
  } else if (c_analyze->parsed()) {
    analyze.input = absolute_path(analyze.input);
    analyze.out_dir = absolute_path(analyze.out_dir);
    run_analyze(analyze, out);
  } else if (c_fit->parsed()) {
    fit.input = absolute_path(fit.input);
    fit.out_dir = absolute_path(fit.out_dir);
    fit.seed = resolve_seed(fit_seed);
    run_fit(fit, out);
  } else if (c_sim->parsed()) {
    sim.params = absolute_path(sim.params);
    sim.out_dir = absolute_path(sim.out_dir);
    sim.seed = resolve_seed(sim_seed);
    run_simulate(sim, out);
  } else if (c_cluster->parsed()) {
    cluster.input = absolute_path(cluster.input);
    cluster.out_dir = absolute_path(cluster.out_dir);
    cluster.seed = resolve_seed(cluster_seed);
    cluster.standardize = !no_standardize;
    run_cluster(cluster, out);
  } else if (c_replay->parsed()) {
    run_replay(replay_path, replay_out, out);
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    // I/O failures and anything else the data provoked
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace chartpulse::cli
