#include "chartpulse/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

#include "chartpulse/error.hpp"
#include "chartpulse/stats.hpp"

namespace chartpulse {

RankProfile rank_stream_stats(const ChartDataset& dataset, Exec exec) {
  const int n = dataset.chart_size();
  RankProfile profile;
  profile.mean.assign(static_cast<std::size_t>(n), 0.0);
  profile.stddev.assign(static_cast<std::size_t>(n), 0.0);
  profile.samples_per_rank = dataset.day_count();
  if (dataset.empty()) return profile;

  const auto days = dataset.day_count();
  const auto entries = dataset.entries();
  auto per_rank = [&](int r) {
    const auto idx = static_cast<std::size_t>(r);
    double sum = 0.0;
    for (std::size_t d = 0; d < days; ++d) {
      sum += static_cast<double>(entries[d * static_cast<std::size_t>(n) + idx].streams);
    }
    const double mean = sum / static_cast<double>(days);
    double ss = 0.0;
    for (std::size_t d = 0; d < days; ++d) {
      const double dev =
          static_cast<double>(entries[d * static_cast<std::size_t>(n) + idx].streams) - mean;
      ss += dev * dev;
    }
    profile.mean[idx] = mean;
    profile.stddev[idx] = std::sqrt(ss / static_cast<double>(days));
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < n; ++r) per_rank(r);
  } else {
    for (int r = 0; r < n; ++r) per_rank(r);
  }
  return profile;
}

PowerLawFit fit_power_law(const RankProfile& profile) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < profile.mean.size(); ++i) {
    if (!(profile.mean[i] > 0.0)) {
      throw DataError("power-law fit needs positive means; rank " + std::to_string(i + 1) +
                      " has " + std::to_string(profile.mean[i]));
    }
    x.push_back(std::log(static_cast<double>(i + 1)));
    y.push_back(std::log(profile.mean[i]));
  }
  const LinearFit fit = ordinary_least_squares(x, y);
  return PowerLawFit{std::exp(fit.intercept), -fit.slope, fit.r_squared, fit.degenerate};
}

PowerLawFit fit_power_law_nonlinear(const RankProfile& profile) {
  PowerLawFit start = fit_power_law(profile);
  const auto n = static_cast<Eigen::Index>(profile.mean.size());
  Eigen::VectorXd rank(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rank[i] = static_cast<double>(i + 1);
    y[i] = profile.mean[static_cast<std::size_t>(i)];
  }
  auto residual = [&](double a, double b) {
    return (a * rank.array().pow(-b) - y.array()).matrix().eval();
  };

  double a = start.scale;
  double b = start.exponent;
  double damping = 1e-3;
  double cost = residual(a, b).squaredNorm();
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd jac(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f = std::pow(rank[i], -b);
      jac(i, 0) = f;
      jac(i, 1) = -a * f * std::log(rank[i]);
    }
    const Eigen::VectorXd r = residual(a, b);
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jtr = jac.transpose() * r;
    bool improved = false;
    while (damping < 1e12) {
      Eigen::Matrix2d system = jtj;
      system.diagonal() *= 1.0 + damping;
      const Eigen::Vector2d step = system.ldlt().solve(-jtr);
      const double trial = residual(a + step[0], b + step[1]).squaredNorm();
      if (std::isfinite(trial) && trial < cost && a + step[0] > 0.0) {
        const double gain = cost - trial;
        a += step[0];
        b += step[1];
        cost = trial;
        damping = std::max(damping / 10.0, 1e-12);
        improved = gain > 1e-15 * cost;
        break;
      }
      damping *= 10.0;
    }
    if (!improved) break;
  }
  const double mean_y = y.mean();
  const double ss_tot = (y.array() - mean_y).square().sum();
  PowerLawFit out;
  out.scale = a;
  out.exponent = b;
  out.degenerate = ss_tot <= 0.0;
  out.r_squared = out.degenerate ? 0.0 : std::clamp(1.0 - cost / ss_tot, 0.0, 1.0);
  return out;
}

std::vector<std::int64_t> unique_songs_per_rank(const ChartDataset& dataset) {
  std::vector<std::set<const SongKey*>> seen(static_cast<std::size_t>(dataset.chart_size()));
  for (const auto& [key, apps] : dataset.song_index()) {
    for (const auto& a : apps) seen[static_cast<std::size_t>(a.position - 1)].insert(&key);
  }
  std::vector<std::int64_t> out;
  out.reserve(seen.size());
  for (const auto& s : seen) out.push_back(static_cast<std::int64_t>(s.size()));
  return out;
}

std::map<SongKey, int> peak_ranks(const ChartDataset& dataset) {
  std::map<SongKey, int> peaks;
  for (const auto& [key, apps] : dataset.song_index()) {
    int best = dataset.chart_size();
    for (const auto& a : apps) best = std::min(best, a.position);
    peaks.emplace(key, best);
  }
  return peaks;
}

PeakRankDurations duration_by_peak_rank(const ChartDataset& dataset) {
  std::map<int, std::pair<std::size_t, double>> acc;
  for (const auto& [key, peak] : peak_ranks(dataset)) {
    auto& [count, sum] = acc[peak];
    ++count;
    sum += first_life(dataset, key);
  }
  PeakRankDurations out;
  for (const auto& [rank, cs] : acc) {
    out.groups.push_back({rank, cs.first, cs.second / static_cast<double>(cs.first)});
  }
  fit_duration_curve(out);
  return out;
}

void fit_duration_curve(PeakRankDurations& durations) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& g : durations.groups) {
    if (g.mean_first_life > 0.0) {
      x.push_back(g.peak_rank);
      y.push_back(std::log(g.mean_first_life));
    }
  }
  durations.fitted = x.size() >= 2;
  if (!durations.fitted) {
    durations.scale = durations.rate = durations.r_squared = 0.0;
    return;
  }
  const LinearFit fit = ordinary_least_squares(x, y);
  durations.scale = std::exp(fit.intercept);
  durations.rate = -fit.slope;
  durations.r_squared = fit.r_squared;
}

std::vector<NumberOneDay> number_one_timeline(const ChartDataset& dataset) {
  std::vector<NumberOneDay> timeline;
  timeline.reserve(dataset.day_count());
  for (std::size_t d = 0; d < dataset.day_count(); ++d) {
    const ChartEntry& top = dataset.day_entries(d).front();
    NumberOneDay day{top.date, top.key(), top.streams, false};
    day.change_point = !timeline.empty() && timeline.back().song != day.song;
    timeline.push_back(std::move(day));
  }
  return timeline;
}

WeekdayProfile day_of_week_profile(const ChartDataset& dataset, int rank) {
  if (rank < 1 || rank > dataset.chart_size()) {
    throw std::invalid_argument("rank " + std::to_string(rank) + " outside the chart");
  }
  if (dataset.day_count() < 7) throw std::invalid_argument("weekday profile needs >= 7 days");
  WeekdayProfile profile;
  std::array<double, 7> sum{};
  for (std::size_t d = 0; d < dataset.day_count(); ++d) {
    const auto& e = dataset.day_entries(d)[static_cast<std::size_t>(rank - 1)];
    const unsigned w = weekday_index(e.date);
    sum[w] += static_cast<double>(e.streams);
    ++profile.days[w];
  }
  for (std::size_t w = 0; w < 7; ++w) {
    profile.mean[w] = profile.days[w] ? sum[w] / static_cast<double>(profile.days[w]) : 0.0;
  }
  return profile;
}

std::vector<RateGroup> decay_rate_by_peak_rank(const ChartDataset& dataset,
                                               const std::map<SongKey, RegressionResult>& fits) {
  std::map<int, std::vector<double>> slopes;
  for (const auto& [key, peak] : peak_ranks(dataset)) {
    if (auto it = fits.find(key); it != fits.end()) slopes[peak].push_back(it->second.slope);
  }
  std::vector<RateGroup> out;
  for (const auto& [rank, values] : slopes) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    out.push_back({rank, values.size(), mean, var});
  }
  return out;
}

}  // namespace chartpulse
