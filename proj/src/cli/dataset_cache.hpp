#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "chartpulse/chart.hpp"

namespace chartpulse::cli {

/// Binary dataset cache. Layout (little endian):
///   magic "CPCACHE\0", u32 format version, u32 chart size, u64 day count,
///   u64 string count, strings as (u32 length, bytes),
///   per day: i32 days since 1970-01-01, then per position
///   (u32 title id, u32 artist id, i64 streams).
inline constexpr std::uint32_t kCacheVersion = 1;
inline constexpr std::string_view kCacheExtension = ".cpc";

std::string serialize_dataset(const ChartDataset& dataset);

/// Throws DataError on a bad magic, unknown version, or truncated input.
ChartDataset deserialize_dataset(std::string_view bytes);

bool is_dataset_cache(const std::filesystem::path& path);

/// Reads a cache file (by content) or a chart CSV. A cache carries its own
/// chart size and ignores `chart_size`.
ChartDataset load_dataset(const std::filesystem::path& path, int chart_size);

/// File stem used in output names: `charts.csv` and `charts.cpc` are both `charts`.
std::string dataset_id(const std::filesystem::path& path);

}  // namespace chartpulse::cli
