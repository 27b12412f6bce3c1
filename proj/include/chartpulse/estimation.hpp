#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chartpulse/chart.hpp"
#include "chartpulse/count_series.hpp"
#include "chartpulse/intensity.hpp"

namespace chartpulse {

/// Converts a chart series to model days 1..T; absent days stay unobserved.
CountSeries to_count_series(const DailySeries& series);

// -- Log-likelihood of the jump-and-decay Poisson model ---------------------
//
// Day i contributes n_i log D_i - log(n_i!) - D_i with D_i the integrated
// intensity over day i. Unobserved days contribute nothing. Derivative
// vectors use the flat layout [baseline, size_0, decay_0, size_1, ...].

double log_likelihood(const IntensityParams& params, const CountSeries& series, double delta);

std::vector<double> log_likelihood_gradient(const IntensityParams& params,
                                            const CountSeries& series, double delta);

/// Diagonal second partials, same layout as the gradient.
std::vector<double> log_likelihood_curvature(const IntensityParams& params,
                                             const CountSeries& series, double delta);

Eigen::MatrixXd log_likelihood_hessian(const IntensityParams& params, const CountSeries& series,
                                       double delta);

// -- Maximum likelihood ----------------------------------------------------

struct FitConfig {
  double delta = 1.0;
  /// Known event times, each a multiple of delta. Empty fits a homogeneous
  /// process (baseline only).
  std::vector<double> jump_times{0.0};
  double baseline_floor = 0.0;
  double size_floor = 1e-8;
  double decay_floor = 1e-8;
  /// Threshold on the scaled projected gradient norm, see MleResult::grad_norm.
  double tol_grad = 1e-8;
  int max_iters = 500;
  int multistart = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MleResult {
  IntensityParams params;
  double log_likelihood = 0.0;
  /// Euclidean norm of the projected gradient with component k multiplied by
  /// max(|x_k|, 1) and the whole vector divided by max(total count, 1).
  /// Components at a lower bound whose gradient points outward count as 0.
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  int restart_index = 0;
  /// Log-likelihood after each accepted iteration of the returned restart,
  /// starting with the initial point.
  std::vector<double> trace;
  std::vector<std::string> warnings;
};

/// Bounded ascent on the log-likelihood: Newton directions from the exact
/// Hessian on the free coordinates, Levenberg damped towards the diagonal
/// second partials when the Hessian is not negative definite, projected onto
/// the lower bounds, with an Armijo backtracking line search. The best of
/// `multistart` random initializations is returned.
MleResult fit_mle(const CountSeries& series, const FitConfig& config);

/// Model day on which the largest relative day-over-day increase happens,
/// (n_i - n_{i-1}) / max(n_{i-1}, 1), searched from the (min_gap + 1)-th day
/// of the series; ties go to the earliest day. std::nullopt when no day
/// increases. A detected day d corresponds to a jump time delta * (d - 1).
std::optional<int> detect_jump_time(const CountSeries& series, int min_gap);

// -- Log-linear regression -------------------------------------------------

/// Inclusive range of model days used by the regression.
struct RegressionWindow {
  int first_day = 1;
  int last_day = 1;

  static RegressionWindow full(const CountSeries& series);
  /// From the day of the series maximum (latest on ties) to the end.
  static RegressionWindow from_final_peak(const CountSeries& series);
};

struct RegressionResult {
  double slope = 0.0;  // per day
  double intercept = 0.0;
  double decay_rate = 0.0;  // -slope; positive means decay
  double r_squared = 0.0;
  bool degenerate = false;  // zero variance in log counts, r_squared set to 0
  RegressionWindow window;
  std::size_t n_points = 0;
};

/// OLS of log n_i on day index over the window. Unobserved days and zero
/// counts are skipped. Throws DataError with fewer than two usable days.
RegressionResult fit_log_linear(const CountSeries& series, RegressionWindow window);

/// Same regression on arbitrary positive values at the given days.
RegressionResult fit_log_linear(std::span<const double> days, std::span<const double> values);

}  // namespace chartpulse
