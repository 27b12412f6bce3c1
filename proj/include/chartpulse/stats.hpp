#pragma once

#include <cstddef>
#include <span>

namespace chartpulse {

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 0 when y has zero variance (degenerate)
  bool degenerate = false;
  std::size_t n = 0;
};

/// Throws NumericalError with fewer than two points or zero variance in x.
LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace chartpulse
