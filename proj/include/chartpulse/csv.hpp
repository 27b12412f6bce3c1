#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace chartpulse {

/// RFC 4180 style reader: comma separated, double-quoted fields with `""`
/// escapes, quoted fields may span lines, CRLF or LF line endings.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in);

  /// Reads the next record into `fields`. Returns false at end of input.
  /// Blank lines are skipped.
  bool next(std::vector<std::string>& fields);

  /// 1-based physical line on which the last returned record started.
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a delimiter, quote, or line break.
std::string csv_escape(std::string_view field);

}  // namespace chartpulse
