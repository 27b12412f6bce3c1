#include "chartpulse/date.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "chartpulse/error.hpp"

namespace chartpulse {

namespace {

int parse_digits(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("invalid date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("invalid date '" + std::string(text) + "', expected yyyy-mm-dd");
  }
  const int y = parse_digits(text.substr(0, 4), text);
  const int m = parse_digits(text.substr(5, 2), text);
  const int d = parse_digits(text.substr(8, 2), text);
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw DataError("invalid calendar date '" + std::string(text) + "'");
  }
  return Date{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return std::string(buf.data());
}

unsigned weekday_index(Date date) { return std::chrono::weekday{date}.c_encoding(); }

std::string_view weekday_name(unsigned index) {
  static constexpr std::array<std::string_view, 7> kNames{
      "Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday"};
  return kNames.at(index);
}

}  // namespace chartpulse
