#include "chartpulse/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "chartpulse/error.hpp"
#include "chartpulse/kernels.hpp"
#include "chartpulse/random.hpp"
#include "chartpulse/stats.hpp"

namespace chartpulse {

CountSeries to_count_series(const DailySeries& series) {
  CountSeries out;
  out.first_day = 1;
  out.counts.reserve(series.counts.size());
  for (const auto& c : series.counts) out.counts.push_back(c ? *c : CountSeries::kAbsent);
  return out;
}

double log_likelihood(const IntensityParams& params, const CountSeries& series, double delta) {
  return evaluate_likelihood(params, series, delta, Derivatives::none).value;
}

std::vector<double> log_likelihood_gradient(const IntensityParams& params,
                                            const CountSeries& series, double delta) {
  const auto terms = evaluate_likelihood(params, series, delta, Derivatives::gradient);
  return {terms.gradient.begin(), terms.gradient.end()};
}

std::vector<double> log_likelihood_curvature(const IntensityParams& params,
                                             const CountSeries& series, double delta) {
  const auto terms = evaluate_likelihood(params, series, delta, Derivatives::hessian);
  const Eigen::VectorXd diag = terms.hessian.diagonal();
  return {diag.begin(), diag.end()};
}

Eigen::MatrixXd log_likelihood_hessian(const IntensityParams& params, const CountSeries& series,
                                       double delta) {
  return evaluate_likelihood(params, series, delta, Derivatives::hessian).hessian;
}

void FitConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (!(tol_grad > 0.0)) throw std::invalid_argument("tol_grad must be > 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (multistart < 1) throw std::invalid_argument("multistart must be >= 1");
  if (baseline_floor < 0.0 || !(size_floor > 0.0) || !(decay_floor > 0.0)) {
    throw std::invalid_argument("lower bounds must be lambda >= 0, theta > 0, beta > 0");
  }
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 80;

struct Problem {
  const CountSeries& series;
  const FitConfig& config;
  IntensityParams shape;  // event times fixed, magnitudes overwritten
  Eigen::VectorXd lower;
  double scale = 1.0;  // 1 / max(total count, 1)
};

struct Point {
  Eigen::VectorXd x;
  LikelihoodTerms terms;
};

bool evaluate(const Problem& prob, const Eigen::VectorXd& x, Derivatives want, LikelihoodTerms& out) {
  try {
    out = evaluate_likelihood(unpack_parameters(x, prob.shape), prob.series, prob.config.delta, want);
  } catch (const DataError&) {
    return false;
  }
  return std::isfinite(out.value);
}

bool at_lower_bound(const Problem& prob, const Eigen::VectorXd& x, Eigen::Index k) {
  return x[k] <= prob.lower[k] * (1.0 + 1e-12) + std::numeric_limits<double>::min();
}

Eigen::VectorXd projected_gradient(const Problem& prob, const Point& pt) {
  Eigen::VectorXd pg = pt.terms.gradient;
  for (Eigen::Index k = 0; k < pg.size(); ++k) {
    if (at_lower_bound(prob, pt.x, k) && pg[k] < 0.0) pg[k] = 0.0;
  }
  return pg;
}

double scaled_norm(const Problem& prob, const Eigen::VectorXd& x, const Eigen::VectorXd& pg) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < pg.size(); ++k) {
    const double v = pg[k] * std::max(std::abs(x[k]), 1.0) * prob.scale;
    sum += v * v;
  }
  return std::sqrt(sum);
}

// Ascent direction on the free coordinates. Solves (-H + mu * S) d = g with S
// the diagonal of -H, raising mu until the system is positive definite. With
// mu large this is the gradient scaled by the reciprocal diagonal curvature.
Eigen::VectorXd newton_direction(const Point& pt, const std::vector<Eigen::Index>& free,
                                 bool diagonal_only) {
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd neg_h(m, m);
  Eigen::VectorXd g(m);
  Eigen::VectorXd diag(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    g[a] = pt.terms.gradient[free[a]];
    for (Eigen::Index b = 0; b < m; ++b) neg_h(a, b) = -pt.terms.hessian(free[a], free[b]);
    diag[a] = neg_h(a, a) > 0.0 ? neg_h(a, a) : std::max(std::abs(neg_h(a, a)), 1e-12);
  }

  Eigen::VectorXd d(m);
  bool solved = false;
  if (!diagonal_only) {
    for (double mu = 0.0; mu <= 1e10; mu = (mu == 0.0 ? 1e-8 : mu * 10.0)) {
      Eigen::MatrixXd system = neg_h;
      system.diagonal() += mu * diag;
      Eigen::LLT<Eigen::MatrixXd> llt(system);
      if (llt.info() != Eigen::Success) continue;
      d = llt.solve(g);
      if (d.allFinite() && d.dot(g) > 0.0) {
        solved = true;
        break;
      }
    }
  }
  if (!solved) d = g.cwiseQuotient(diag);

  Eigen::VectorXd full = Eigen::VectorXd::Zero(pt.x.size());
  for (Eigen::Index a = 0; a < m; ++a) full[free[a]] = d[a];
  return full;
}

// Projected Armijo backtracking along `dir`. Returns true and replaces `pt`
// when a step with sufficient increase is found.
bool line_search(const Problem& prob, Point& pt, const Eigen::VectorXd& dir) {
  double step = 1.0;
  Point trial;
  for (int k = 0; k < kMaxBacktracks; ++k, step *= 0.5) {
    trial.x = (pt.x + step * dir).cwiseMax(prob.lower);
    const Eigen::VectorXd moved = trial.x - pt.x;
    const double predicted = pt.terms.gradient.dot(moved);
    if (!(predicted > 0.0)) {
      if (moved.cwiseAbs().maxCoeff() == 0.0) return false;
      continue;
    }
    if (!evaluate(prob, trial.x, Derivatives::none, trial.terms)) continue;
    if (trial.terms.value >= pt.terms.value + kArmijo * predicted) {
      if (!evaluate(prob, trial.x, Derivatives::hessian, trial.terms)) return false;
      pt = std::move(trial);
      return true;
    }
  }
  return false;
}

struct SingleFit {
  Point pt;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  // line search found no ascent step before tol_grad
  double grad_norm = 0.0;
  std::vector<double> trace;
};

SingleFit ascend(const Problem& prob, Eigen::VectorXd start) {
  SingleFit fit;
  fit.pt.x = start.cwiseMax(prob.lower);
  if (!evaluate(prob, fit.pt.x, Derivatives::hessian, fit.pt.terms)) {
    throw NumericalError("initial point has zero likelihood");
  }
  fit.trace.push_back(fit.pt.terms.value);

  for (;;) {
    const Eigen::VectorXd pg = projected_gradient(prob, fit.pt);
    fit.grad_norm = scaled_norm(prob, fit.pt.x, pg);
    if (fit.grad_norm <= prob.config.tol_grad) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= prob.config.max_iters) break;

    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < pg.size(); ++k) {
      if (!(at_lower_bound(prob, fit.pt.x, k) && fit.pt.terms.gradient[k] <= 0.0)) {
        free.push_back(k);
      }
    }
    if (free.empty()) {
      fit.converged = true;
      break;
    }

    bool moved = line_search(prob, fit.pt, newton_direction(fit.pt, free, false));
    if (!moved) moved = line_search(prob, fit.pt, newton_direction(fit.pt, free, true));
    if (!moved) {
      fit.stalled = true;  // no representable ascent step remains
      break;
    }
    ++fit.iterations;
    fit.trace.push_back(fit.pt.terms.value);
  }
  return fit;
}

// Observed count on `day`, falling forward to the next observed day.
std::int64_t count_near(const CountSeries& series, int day) {
  for (int d = std::max(day, series.first_day); d <= series.last_day(); ++d) {
    const auto n = series.at_day(d);
    if (n != CountSeries::kAbsent) return n;
  }
  return 0;
}

// Observed count strictly before `day`, falling back to earlier days.
std::optional<std::int64_t> count_before(const CountSeries& series, int day) {
  for (int d = std::min(day - 1, series.last_day()); d >= series.first_day; --d) {
    const auto n = series.at_day(d);
    if (n != CountSeries::kAbsent) return n;
  }
  return std::nullopt;
}

Eigen::VectorXd initial_point(const Problem& prob, Rng& rng) {
  const auto& series = prob.series;
  const double delta = prob.config.delta;
  std::int64_t min_count = std::numeric_limits<std::int64_t>::max();
  for (auto n : series.counts) {
    if (n != CountSeries::kAbsent) min_count = std::min(min_count, n);
  }
  IntensityParams init = prob.shape;
  init.baseline = static_cast<double>(min_count) / delta;
  for (std::size_t j = 0; j < init.events.size(); ++j) {
    auto& e = init.events[j];
    const int day = static_cast<int>(std::lround(e.time / delta)) + 1;
    const double at_jump = static_cast<double>(count_near(series, day));
    double level = at_jump - init.baseline * delta;
    if (j > 0) {
      if (auto before = count_before(series, day)) level = at_jump - static_cast<double>(*before);
    }
    const double u = rng.uniform(0.5, 2.0);
    e.decay = rng.uniform(0.01, 0.5);
    // a jump of `level` streams on its first day implies size = level / (1 - e^{-decay delta})
    e.size = std::max(level, 1.0) * u / -std::expm1(-e.decay * delta);
  }
  return pack_parameters(init);
}

void check_preconditions(const CountSeries& series, const FitConfig& config) {
  config.validate();
  const std::size_t params = 1 + 2 * config.jump_times.size();
  if (series.observed_days() < params) {
    throw DataError("insufficient data points: " + std::to_string(series.observed_days()) +
                    " observed days for " + std::to_string(params) + " parameters");
  }
  const double horizon = config.delta * series.last_day();
  for (std::size_t j = 0; j < config.jump_times.size(); ++j) {
    const double a = config.jump_times[j];
    const double steps = a / config.delta;
    if (a < 0.0 || a >= horizon || std::abs(steps - std::round(steps)) > 1e-9) {
      throw std::invalid_argument("jump time " + std::to_string(a) +
                                  " must be a multiple of delta within [0, delta * T)");
    }
    if (j > 0 && !(a > config.jump_times[j - 1])) {
      throw std::invalid_argument("jump times must be strictly increasing");
    }
  }
}

}  // namespace

MleResult fit_mle(const CountSeries& series, const FitConfig& config) {
  check_preconditions(series, config);

  Problem prob{series, config, {}, {}, 1.0};
  for (double a : config.jump_times) prob.shape.events.push_back(JumpEvent{a, 1.0, 1.0});
  const auto p = static_cast<Eigen::Index>(parameter_count(prob.shape));
  prob.lower.resize(p);
  prob.lower[0] = config.baseline_floor;
  for (std::size_t j = 0; j < config.jump_times.size(); ++j) {
    prob.lower[static_cast<Eigen::Index>(size_index(j))] = config.size_floor;
    prob.lower[static_cast<Eigen::Index>(decay_index(j))] = config.decay_floor;
  }
  prob.scale = 1.0 / std::max<double>(static_cast<double>(series.total()), 1.0);

  MleResult best;
  bool have_best = false;
  bool stalled = false;
  for (int r = 0; r < config.multistart; ++r) {
    Rng rng(config.seed, static_cast<std::uint64_t>(r));
    Eigen::VectorXd start = initial_point(prob, rng);
    LikelihoodTerms probe;
    if (!evaluate(prob, start.cwiseMax(prob.lower), Derivatives::none, probe)) {
      // baseline from the minimum cannot explain the data on days no event covers
      start[0] = std::max(start[0], static_cast<double>(series.total()) /
                                        (config.delta * static_cast<double>(series.observed_days())));
    }
    SingleFit fit = ascend(prob, start);
    if (!have_best || fit.pt.terms.value > best.log_likelihood) {
      have_best = true;
      best.params = unpack_parameters(fit.pt.x, prob.shape);
      best.log_likelihood = fit.pt.terms.value;
      best.grad_norm = fit.grad_norm;
      best.iterations = fit.iterations;
      best.converged = fit.converged;
      stalled = fit.stalled;
      best.restart_index = r;
      best.trace = std::move(fit.trace);
    }
  }

  if (series.total() == 0) {
    best.warnings.push_back("all counts are zero; baseline sits at its lower bound");
  }
  if (!best.converged) {
    std::ostringstream msg;
    msg << (stalled ? "line search stalled" : "max_iters reached") << " before tol_grad (grad_norm "
        << best.grad_norm << " > " << config.tol_grad << ")";
    best.warnings.push_back(msg.str());
  }
  return best;
}

std::optional<int> detect_jump_time(const CountSeries& series, int min_gap) {
  if (min_gap < 0) throw std::invalid_argument("min_gap must be >= 0");
  if (series.counts.size() < static_cast<std::size_t>(min_gap) + 2) {
    throw std::invalid_argument("series too short for jump detection");
  }
  std::optional<int> best_day;
  double best_score = 0.0;
  for (std::size_t k = static_cast<std::size_t>(min_gap) + 1; k < series.counts.size(); ++k) {
    if (!series.observed(k) || !series.observed(k - 1)) continue;
    const double prev = static_cast<double>(series.counts[k - 1]);
    const double score = (static_cast<double>(series.counts[k]) - prev) / std::max(prev, 1.0);
    if (score > best_score) {
      best_score = score;
      best_day = series.first_day + static_cast<int>(k);
    }
  }
  return best_day;
}

RegressionWindow RegressionWindow::full(const CountSeries& series) {
  return RegressionWindow{series.first_day, series.last_day()};
}

RegressionWindow RegressionWindow::from_final_peak(const CountSeries& series) {
  int peak_day = series.first_day;
  std::int64_t peak = -1;
  for (std::size_t k = 0; k < series.counts.size(); ++k) {
    if (series.observed(k) && series.counts[k] >= peak) {
      peak = series.counts[k];
      peak_day = series.first_day + static_cast<int>(k);
    }
  }
  return RegressionWindow{peak_day, series.last_day()};
}

RegressionResult fit_log_linear(std::span<const double> days, std::span<const double> values) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < days.size() && i < values.size(); ++i) {
    if (values[i] > 0.0 && std::isfinite(values[i])) {
      x.push_back(days[i]);
      y.push_back(std::log(values[i]));
    }
  }
  if (x.size() < 2) {
    throw DataError("log-linear regression needs at least 2 days with positive counts");
  }
  const LinearFit fit = ordinary_least_squares(x, y);
  RegressionResult out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.decay_rate = -fit.slope;
  out.r_squared = fit.r_squared;
  out.degenerate = fit.degenerate;
  out.n_points = fit.n;
  out.window = RegressionWindow{static_cast<int>(std::lround(x.front())),
                                static_cast<int>(std::lround(x.back()))};
  return out;
}

RegressionResult fit_log_linear(const CountSeries& series, RegressionWindow window) {
  std::vector<double> days;
  std::vector<double> values;
  for (int d = std::max(window.first_day, series.first_day);
       d <= std::min(window.last_day, series.last_day()); ++d) {
    const auto n = series.at_day(d);
    if (n == CountSeries::kAbsent) continue;
    days.push_back(static_cast<double>(d));
    values.push_back(static_cast<double>(n));
  }
  RegressionResult out = fit_log_linear(days, values);
  out.window = window;
  return out;
}

}  // namespace chartpulse
