#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace chartpulse {

/// Calendar day of a chart, proleptic Gregorian.
using Date = std::chrono::sys_days;

/// Parses `yyyy-mm-dd`. Throws DataError on anything else.
Date parse_date(std::string_view text);

std::string format_date(Date date);

/// 0 = Sunday ... 6 = Saturday.
unsigned weekday_index(Date date);

std::string_view weekday_name(unsigned index);

inline long days_between(Date from, Date to) { return (to - from).count(); }

}  // namespace chartpulse
