#include "chartpulse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chartpulse/error.hpp"

namespace chartpulse {

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericalError("regression inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw NumericalError("regression needs at least 2 points");

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  // a constant column can leave rounding residue in the centered sums
  auto negligible = [n](double ss, std::span<const double> v) {
    double scale = 0.0;
    for (double t : v) scale = std::max(scale, std::abs(t));
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() * scale;
    return ss <= static_cast<double>(n) * floor * floor;
  };
  if (negligible(sxx, x)) throw NumericalError("regression has zero variance in the regressor");

  LinearFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  if (negligible(syy, y)) {
    fit.degenerate = true;
    fit.r_squared = 0.0;
    return fit;
  }
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

}  // namespace chartpulse
