#include "chartpulse/csv.hpp"

namespace chartpulse {

CsvReader::CsvReader(std::istream& in) : in_(in) {}

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool field_started = false;
  record_line_ = line_;

  int ch;
  while ((ch = in_.get()) != std::char_traits<char>::eof()) {
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
      any = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
      any = true;
    } else if (c == '\r') {
      // swallowed; the following '\n' ends the record
    } else if (c == '\n') {
      ++line_;
      if (!any) {
        record_line_ = line_;
        continue;
      }
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
      field_started = true;
      any = true;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace chartpulse
