#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chartpulse {

/// Writes `content` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest round-trippable decimal form of a double.
std::string format_number(double value);

/// Minimal SVG line/scatter chart: axes with min/max tick labels, one
/// polyline or set of points per series, title and axis labels.
class SvgPlot {
 public:
  enum class Style { line, points };

  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_series(std::string name, std::vector<double> x, std::vector<double> y,
                  Style style = Style::line);
  void set_log_y(bool on) { log_y_ = on; }
  std::string render() const;

 private:
  struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    Style style;
  };
  std::string title_;
  std::string x_label_;
  std::string y_label_;
  bool log_y_ = false;
  std::vector<Series> series_;
};

}  // namespace chartpulse
