#include "chartpulse/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace chartpulse {

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot replace " + path.string() + ": " + ec.message());
  }
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fixed(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << v;
  return os.str();
}

std::string tick(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

constexpr std::array<std::string_view, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                                   "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_series(std::string name, std::vector<double> x, std::vector<double> y,
                         Style style) {
  if (x.size() != y.size()) throw std::invalid_argument("series x/y length mismatch");
  series_.push_back({std::move(name), std::move(x), std::move(y), style});
}

std::string SvgPlot::render() const {
  constexpr double kWidth = 800, kHeight = 500, kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
  auto ty = [&](double y) { return log_y_ ? std::log10(y) : y; };

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (log_y_ && !(s.y[i] > 0.0)) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, ty(s.y[i]));
      y_max = std::max(y_max, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;

  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kWidth - kLeft - kRight); };
  auto py = [&](double y) {
    return kHeight - kBottom - (ty(y) - y_min) / (y_max - y_min) * (kHeight - kTop - kBottom);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << xml_escape(title_) << "</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight
     << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"" << kHeight - kBottom + 16 << "\">" << tick(x_min)
     << "</text>\n";
  os << "<text x=\"" << kWidth - kRight << "\" y=\"" << kHeight - kBottom + 16
     << "\" text-anchor=\"end\">" << tick(x_max) << "</text>\n";
  const double y_lo = log_y_ ? std::pow(10.0, y_min) : y_min;
  const double y_hi = log_y_ ? std::pow(10.0, y_max) : y_max;
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kHeight - kBottom << "\" text-anchor=\"end\">"
     << tick(y_lo) << "</text>\n";
  os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">"
     << tick(y_hi) << "</text>\n";
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 20
     << "\" text-anchor=\"middle\">" << xml_escape(x_label_) << "</text>\n";
  os << "<text transform=\"translate(20," << (kTop + kHeight - kBottom) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label_)
     << (log_y_ ? " (log)" : "") << "</text>\n";

  for (std::size_t s = 0; s < series_.size(); ++s) {
    const auto& series = series_[s];
    const auto color = kColors[s % kColors.size()];
    if (series.style == Style::line) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
      for (std::size_t i = 0; i < series.x.size(); ++i) {
        if (log_y_ && !(series.y[i] > 0.0)) continue;
        os << fixed(px(series.x[i])) << ',' << fixed(py(series.y[i])) << ' ';
      }
      os << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < series.x.size(); ++i) {
        if (log_y_ && !(series.y[i] > 0.0)) continue;
        os << "<circle cx=\"" << fixed(px(series.x[i])) << "\" cy=\"" << fixed(py(series.y[i]))
           << "\" r=\"2\" fill=\"" << color << "\"/>\n";
      }
    }
    os << "<text x=\"" << kWidth - kRight - 4 << "\" y=\"" << kTop + 14 * (s + 1)
       << "\" text-anchor=\"end\" fill=\"" << color << "\">" << xml_escape(series.name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace chartpulse
