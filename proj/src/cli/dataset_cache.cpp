#include "cli/dataset_cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "chartpulse/error.hpp"

namespace chartpulse::cli {

namespace {

constexpr char kMagic[8] = {'C', 'P', 'C', 'A', 'C', 'H', 'E', '\0'};

static_assert(std::endian::native == std::endian::little,
              "cache I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("dataset cache is truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string serialize_dataset(const ChartDataset& dataset) {
  std::vector<std::string_view> strings;
  std::unordered_map<std::string_view, std::uint32_t> ids;
  auto id_of = [&](std::string_view s) {
    auto [it, fresh] = ids.try_emplace(s, static_cast<std::uint32_t>(strings.size()));
    if (fresh) strings.push_back(s);
    return it->second;
  };
  std::vector<std::uint32_t> refs;
  refs.reserve(dataset.entries().size() * 2);
  for (const auto& e : dataset.entries()) {
    refs.push_back(id_of(e.title));
    refs.push_back(id_of(e.artist));
  }

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCacheVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.chart_size()));
  put<std::uint64_t>(out, dataset.day_count());
  put<std::uint64_t>(out, strings.size());
  for (auto s : strings) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
  }
  const auto n = static_cast<std::size_t>(dataset.chart_size());
  for (std::size_t d = 0; d < dataset.day_count(); ++d) {
    put<std::int32_t>(out, static_cast<std::int32_t>(dataset.days()[d].time_since_epoch().count()));
    const auto day = dataset.day_entries(d);
    for (std::size_t p = 0; p < n; ++p) {
      put<std::uint32_t>(out, refs[2 * (d * n + p)]);
      put<std::uint32_t>(out, refs[2 * (d * n + p) + 1]);
      put<std::int64_t>(out, day[p].streams);
    }
  }
  return out;
}

ChartDataset deserialize_dataset(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw DataError("not a dataset cache");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCacheVersion) {
    throw DataError("dataset cache format " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kCacheVersion) + "); re-run ingest");
  }
  const auto chart_size = static_cast<int>(in.get<std::uint32_t>());
  const auto days = in.get<std::uint64_t>();
  const auto string_count = in.get<std::uint64_t>();
  if (string_count > bytes.size()) throw DataError("dataset cache is corrupt");
  std::vector<std::string> strings;
  strings.reserve(string_count);
  for (std::uint64_t i = 0; i < string_count; ++i) {
    strings.emplace_back(in.take(in.get<std::uint32_t>()));
  }
  if (chart_size < 1 || days > bytes.size() / static_cast<std::size_t>(chart_size)) {
    throw DataError("dataset cache is corrupt");
  }
  std::vector<ChartEntry> entries;
  entries.reserve(days * static_cast<std::size_t>(chart_size));
  for (std::uint64_t d = 0; d < days; ++d) {
    const Date date{std::chrono::days{in.get<std::int32_t>()}};
    for (int p = 1; p <= chart_size; ++p) {
      const auto title = in.get<std::uint32_t>();
      const auto artist = in.get<std::uint32_t>();
      const auto streams = in.get<std::int64_t>();
      if (title >= strings.size() || artist >= strings.size()) {
        throw DataError("dataset cache is corrupt");
      }
      entries.push_back({date, p, strings[title], strings[artist], streams});
    }
  }
  if (!in.done()) throw DataError("dataset cache has trailing bytes");
  return ChartDataset::from_entries(std::move(entries), chart_size);
}

bool is_dataset_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char head[sizeof(kMagic)] = {};
  in.read(head, sizeof(head));
  return in.gcount() == sizeof(head) && std::memcmp(head, kMagic, sizeof(head)) == 0;
}

ChartDataset load_dataset(const std::filesystem::path& path, int chart_size) {
  if (is_dataset_cache(path)) return deserialize_dataset(read_all(path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return parse_chart_csv(in, chart_size);
}

std::string dataset_id(const std::filesystem::path& path) {
  std::string id = path.stem().string();
  for (char& c : id) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return id.empty() ? "dataset" : id;
}

}  // namespace chartpulse::cli
