// Acceptance gate: one PASS / FAIL / SKIP line per criterion. Tolerances are
// pinned below; the exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chartpulse/analytics.hpp"
#include "chartpulse/chart.hpp"
#include "chartpulse/clustering.hpp"
#include "chartpulse/estimation.hpp"
#include "chartpulse/intensity.hpp"
#include "chartpulse/random.hpp"
#include "chartpulse/simulation.hpp"
#include "cli/dataset_cache.hpp"
#include "cli_harness.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using namespace chartpulse;

// -- pinned tolerances ------------------------------------------------------
constexpr int kGradientPoints = 100;
constexpr double kGradientRelTol = 1e-5;
constexpr double kGradientSeconds = 10.0;
constexpr double kCurvatureSeconds = 10.0;
constexpr int kQuadraturePairs = 1000;
constexpr double kQuadratureRelTol = 1e-9;
constexpr double kQuadratureSeconds = 10.0;
constexpr int kRecoverySeeds = 20;
constexpr double kRecoveryBaselineTol = 0.05;
constexpr double kRecoverySizeTol = 0.15;
constexpr double kRecoveryDecayTol = 0.15;
constexpr double kRecoverySeconds = 120.0;
constexpr double kNoiselessSlopeTol = 1e-10;
constexpr int kRegressionSeeds = 20;
constexpr double kRegressionRateTol = 0.05;
constexpr double kRegressionMinR2 = 0.95;
constexpr int kPoissonDraws = 1'000'000;
constexpr double kSigmas = 3.0;
constexpr int kThinningReps = 200;
constexpr int kKMeansInstances = 100;
constexpr int kKMeansMinOptimal = 95;
constexpr int kKMeansSeeds = 10;
constexpr double kPowerLawScale = 2.3689e6;
constexpr double kPowerLawExponent = 0.5426;
constexpr double kPowerLawRelTol = 0.02;
constexpr double kPowerLawMinR2 = 0.97;
constexpr double kRankOneDuration = 250.0;
constexpr double kRankOneDurationTol = 0.10;

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1 --------------------------------------------------------------------------
Outcome gradient_consistency() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string where;
  for (int i = 0; i < kGradientPoints; ++i) {
    const auto pt = fixture::random_feasible_point(10'000 + static_cast<std::uint64_t>(i));
    const auto grad = log_likelihood_gradient(pt.params, pt.series, pt.delta);
    const auto fd = fixture::finite_differences(pt.params, pt.series, pt.delta, 1e-4, 1e-3);
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const double err = fixture::relative_error(grad[k], fd.first[k]);
      if (err > worst) {
        worst = err;
        where = "point " + std::to_string(i) + " component " + std::to_string(k);
      }
    }
  }
  const double t = seconds_since(start);
  return verdict(worst <= kGradientRelTol && t < kGradientSeconds,
                 "max relative error " + sci(worst) + " (" + where + ") <= " + sci(kGradientRelTol) +
                     ", " + sci(t) + " s < " + sci(kGradientSeconds) + " s");
}

// 2 --------------------------------------------------------------------------
Outcome curvature_sign() {
  const auto start = std::chrono::steady_clock::now();
  double largest = -INFINITY;
  int positive = 0;
  for (int i = 0; i < kGradientPoints; ++i) {
    const auto pt = fixture::random_feasible_point(10'000 + static_cast<std::uint64_t>(i));
    for (double c : log_likelihood_curvature(pt.params, pt.series, pt.delta)) {
      largest = std::max(largest, c);
      positive += c > 0.0 ? 1 : 0;
    }
  }
  const double t = seconds_since(start);
  return verdict(positive == 0 && t < kCurvatureSeconds,
                 std::to_string(positive) + " positive components, largest " + sci(largest) + ", " +
                     sci(t) + " s < " + sci(kCurvatureSeconds) + " s");
}

// 3 --------------------------------------------------------------------------
Outcome quadrature_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(31337);
  double worst = 0.0;
  for (int i = 0; i < kQuadraturePairs; ++i) {
    IntensityParams p{std::exp(rng.uniform(std::log(1e3), std::log(1e6))), {}};
    double t = rng.below(2) ? 0.0 : rng.uniform(0.0, 20.0);
    const int events = 1 + static_cast<int>(rng.below(3));
    for (int j = 0; j < events; ++j) {
      p.events.push_back({t, std::exp(rng.uniform(std::log(1e4), std::log(1e7))), rng.uniform(0.01, 1.0)});
      t += rng.uniform(0.5, 100.0);
    }
    const double delta = rng.below(2) ? 1.0 : rng.uniform(0.25, 2.0);
    const int day = 1 + static_cast<int>(rng.below(400));
    const double closed = integrated_intensity(p, day, delta);
    const double quad = oracle::integrate_intensity(p, delta * (day - 1), delta * day);
    worst = std::max(worst, fixture::relative_error(closed, quad));
  }
  const double t = seconds_since(start);
  return verdict(worst <= kQuadratureRelTol && t < kQuadratureSeconds,
                 "max relative error " + sci(worst) + " <= " + sci(kQuadratureRelTol) + ", " + sci(t) +
                     " s < " + sci(kQuadratureSeconds) + " s");
}

// 4 --------------------------------------------------------------------------
Outcome parameter_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const IntensityParams truth{1e5, {{0.0, 5e6, 0.05}, {60.0, 2e6, 0.08}}};
  const DayGrid grid{1.0, 300};
  std::vector<double> baseline, size0, size1, decay0, decay1;
  int converged = 0;
  for (int s = 0; s < kRecoverySeeds; ++s) {
    const auto seed = 4000 + static_cast<std::uint64_t>(s);
    const auto series = CountSeries::from_counts(simulate_daily_counts(truth, SimConfig{grid, seed}, Exec::parallel));
    FitConfig cfg;
    cfg.jump_times = {0.0, 60.0};
    cfg.seed = seed;
    const auto fit = fit_mle(series, cfg);
    converged += fit.converged ? 1 : 0;
    const auto rel = [](double est, double ref) { return std::abs(est - ref) / ref; };
    baseline.push_back(rel(fit.params.baseline, truth.baseline));
    size0.push_back(rel(fit.params.events[0].size, truth.events[0].size));
    size1.push_back(rel(fit.params.events[1].size, truth.events[1].size));
    decay0.push_back(rel(fit.params.events[0].decay, truth.events[0].decay));
    decay1.push_back(rel(fit.params.events[1].decay, truth.events[1].decay));
  }
  const double t = seconds_since(start);
  const double mb = median(baseline), ms0 = median(size0), ms1 = median(size1), md0 = median(decay0),
               md1 = median(decay1);
  const bool ok = mb <= kRecoveryBaselineTol && ms0 <= kRecoverySizeTol && ms1 <= kRecoverySizeTol &&
                  md0 <= kRecoveryDecayTol && md1 <= kRecoveryDecayTol && t < kRecoverySeconds;
  return verdict(ok, "median relative errors lambda " + sci(mb) + ", theta " + sci(ms0) + "/" + sci(ms1) +
                         ", beta " + sci(md0) + "/" + sci(md1) + "; " + std::to_string(converged) + "/" +
                         std::to_string(kRecoverySeeds) + " converged, " + sci(t) + " s < " +
                         sci(kRecoverySeconds) + " s");
}

// 5 --------------------------------------------------------------------------
Outcome regression_estimator() {
  double worst_slope = 0.0;
  for (double beta : {0.01, 0.05, 0.3, -0.02}) {
    std::vector<double> days, values;
    for (int i = 1; i <= 200; ++i) {
      days.push_back(i);
      values.push_back(1e5 * std::exp(-beta * i));
    }
    const auto fit = fit_log_linear(days, values);
    worst_slope = std::max(worst_slope, std::abs(fit.slope + beta));
  }
  const double beta = 0.05;
  std::vector<double> rate_err, r2;
  for (int s = 0; s < kRegressionSeeds; ++s) {
    std::vector<std::int64_t> counts;
    for (int i = 1; i <= 200; ++i) {
      Rng rng(5000 + static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(i));
      counts.push_back(poisson_sample(1e5 * std::exp(-beta * i), rng));
    }
    const auto series = CountSeries::from_counts(std::move(counts));
    const auto fit = fit_log_linear(series, RegressionWindow::full(series));
    rate_err.push_back(std::abs(fit.decay_rate - beta) / beta);
    r2.push_back(fit.r_squared);
  }
  const double me = median(rate_err), mr = median(r2);
  return verdict(worst_slope <= kNoiselessSlopeTol && me <= kRegressionRateTol && mr >= kRegressionMinR2,
                 "noiseless slope error " + sci(worst_slope) + " <= " + sci(kNoiselessSlopeTol) +
                     "; Poisson median rate error " + sci(me) + " <= " + sci(kRegressionRateTol) +
                     ", median R^2 " + sci(mr) + " >= " + sci(kRegressionMinR2));
}

// 6 --------------------------------------------------------------------------
Outcome simulation_correctness() {
  std::string detail;
  bool ok = true;
  for (double mean : {0.5, 4.0, 50.0}) {
    Rng rng(6000 + static_cast<std::uint64_t>(mean * 10));
    double m = 0.0, ss = 0.0;
    for (int i = 1; i <= kPoissonDraws; ++i) {
      const double x = static_cast<double>(poisson_sample(mean, rng));
      const double d = x - m;
      m += d / i;
      ss += d * (x - m);
    }
    const double var = ss / (kPoissonDraws - 1);
    const double z_mean = (m - mean) / std::sqrt(mean / kPoissonDraws);
    const double z_var = (var - mean) / std::sqrt((mean + 2.0 * mean * mean) / kPoissonDraws);
    ok = ok && std::abs(z_mean) <= kSigmas && std::abs(z_var) <= kSigmas;
    detail += "mean " + sci(mean) + ": z " + sci(z_mean) + "/" + sci(z_var) + "; ";
  }
  const IntensityParams p{20.0, {{0.0, 600.0, 0.3}, {6.0, 300.0, 0.8}}};
  const DayGrid grid{1.0, 10};
  std::vector<double> thin(10, 0.0), daily(10, 0.0);
  for (int r = 0; r < kThinningReps; ++r) {
    const auto seed = 6500 + static_cast<std::uint64_t>(r);
    const auto binned = bin_event_times(simulate_event_times(p, grid.delta * grid.days, seed), grid);
    const auto counts = simulate_daily_counts(p, SimConfig{grid, seed});
    for (std::size_t i = 0; i < 10; ++i) {
      thin[i] += static_cast<double>(binned[i]);
      daily[i] += static_cast<double>(counts[i]);
    }
  }
  const auto expected = expected_daily_counts(p, grid);
  double worst_z = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    // the two means are independent, each with variance expected / reps
    const double se = std::sqrt(2.0 * expected[i] / kThinningReps);
    worst_z = std::max(worst_z, std::abs(thin[i] - daily[i]) / kThinningReps / se);
  }
  ok = ok && worst_z <= kSigmas;
  detail += "thinning vs daily max |z| " + sci(worst_z) + " over 10 days x " +
            std::to_string(kThinningReps) + " reps (limit " + sci(kSigmas) + ")";
  return verdict(ok, detail);
}

// 7 --------------------------------------------------------------------------
Outcome kmeans_oracle() {
  Rng rng(7000);
  int optimal = 0, below = 0, increases = 0;
  for (int instance = 0; instance < kKMeansInstances; ++instance) {
    std::vector<FeaturePoint> pts;
    const auto n = 3 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0)});
    const double best = oracle::best_two_partition_inertia(pts);
    double lloyd = INFINITY;
    for (int s = 0; s < kKMeansSeeds; ++s) {
      const auto r = kmeans(pts, 2, static_cast<std::uint64_t>(instance) * 100 + static_cast<std::uint64_t>(s));
      for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
        increases += r.inertia_trace[i] > r.inertia_trace[i - 1] * (1.0 + 1e-12) ? 1 : 0;
      }
      lloyd = std::min(lloyd, r.inertia);
    }
    below += lloyd < best * (1.0 - 1e-12) ? 1 : 0;
    optimal += lloyd <= best * (1.0 + 1e-9) ? 1 : 0;
  }
  return verdict(optimal >= kKMeansMinOptimal && below == 0 && increases == 0,
                 std::to_string(optimal) + "/" + std::to_string(kKMeansInstances) + " optimal (need " +
                     std::to_string(kKMeansMinOptimal) + "), " + std::to_string(below) +
                     " below the oracle, " + std::to_string(increases) + " inertia increases");
}

// 8 --------------------------------------------------------------------------
Outcome full_dataset() {
  const char* path = std::getenv("CHARTPULSE_FULL_DATA");
  if (!path || !*path) return {Status::skip, "set CHARTPULSE_FULL_DATA to the 620-day chart CSV"};
  const ChartDataset ds = cli::load_dataset(path, 200);
  std::vector<std::string> failures;
  std::string detail = std::to_string(ds.day_count()) + " days; ";

  const auto law = fit_power_law(rank_stream_stats(ds, Exec::parallel));
  const double ea = std::abs(law.scale - kPowerLawScale) / kPowerLawScale;
  const double eb = std::abs(law.exponent - kPowerLawExponent) / kPowerLawExponent;
  detail += "a " + sci(law.scale) + ", b " + sci(law.exponent) + ", R^2 " + sci(law.r_squared) + "; ";
  if (ea > kPowerLawRelTol || eb > kPowerLawRelTol || law.r_squared < kPowerLawMinR2) failures.push_back("power law");

  const auto durations = duration_summary(ds);
  const std::array<long, 4> want_bp{3180, 6867, 8404, 9923};  // hundredths of a percent
  for (std::size_t i = 0; i < 4; ++i) {
    const long got = std::lround(durations.fractions[i] * 10'000.0);
    detail += std::to_string(got) + (i < 3 ? "/" : " bp; ");
    if (got != want_bp[i]) failures.push_back("duration fraction " + std::to_string(i));
  }

  const std::map<std::string, int> table{{"Goosebumps", 617}, {"Congratulations", 617}, {"Location", 616},
                                         {"Shape of You", 603}};
  for (const auto& [title, want] : table) {
    int got = -1;
    for (const auto& [key, apps] : ds.song_index()) {
      if (key.title == title) got = std::max(got, first_life(ds, key));
    }
    if (got != want) failures.push_back(title + " first life " + std::to_string(got));
  }

  std::set<SongKey> number_ones;
  for (const auto& d : number_one_timeline(ds)) number_ones.insert(d.song);
  detail += std::to_string(number_ones.size()) + " number-one songs; ";
  if (number_ones.size() != 32) failures.push_back("number-one count");

  const auto by_peak = duration_by_peak_rank(ds);
  const double rank_one = !by_peak.groups.empty() && by_peak.groups.front().peak_rank == 1
                              ? by_peak.groups.front().mean_first_life
                              : 0.0;
  detail += "rank-1 mean life " + sci(rank_one) + "; ";
  if (std::abs(rank_one - kRankOneDuration) > kRankOneDurationTol * kRankOneDuration) {
    failures.push_back("rank-1 duration");
  }

  const auto week = day_of_week_profile(ds, 200);
  const auto top = static_cast<unsigned>(std::max_element(week.mean.begin(), week.mean.end()) - week.mean.begin());
  detail += "rank-200 peak " + std::string(weekday_name(top));
  if (top != 6) failures.push_back("weekday peak");

  for (const auto& f : failures) detail += "; failed: " + f;
  return verdict(failures.empty(), detail);
}

// 9 --------------------------------------------------------------------------
Outcome manifest_replay() {
  const std::string data = CHARTPULSE_TEST_DATA_DIR;
  fixture::TempDir dir, replay;
  const std::string d = dir.path().string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"ingest_toy_2day", {"ingest", "-i", data + "/toy_2day.csv", "--chart-size", "3", "-o", d}},
      {"analyze_toy_2day", {"analyze", "-i", data + "/toy_2day.csv", "--chart-size", "3", "--svg", "-o", d}},
      {"simulate_two_events", {"simulate", "-p", data + "/two_events.json", "--seed", "9", "-o", d}},
      {"fit_simulate_two_events_simulated-chartpulse",
       {"fit", "-i", dir / "simulate_two_events.csv", "--chart-size", "1", "--auto-jump", "--seed", "3", "-o", d}},
      {"cluster_four_songs", {"cluster", "-i", data + "/four_songs.csv", "--chart-size", "4", "--k", "2", "--seed",
                              "4", "-o", d}},
  };
  std::string detail;
  bool ok = true;
  for (const auto& [manifest, args] : runs) {
    const auto r = fixture::run_cli(args);
    if (r.code != 0) {
      ok = false;
      detail += args[0] + " exited " + std::to_string(r.code) + "; ";
      continue;
    }
    const auto diff = fixture::replay_differences(dir / (manifest + ".manifest.json"), replay.path());
    ok = ok && diff.empty();
    detail += args[0] + (diff.empty() ? " identical; " : " " + diff);
  }
  return verdict(ok, detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient consistency", gradient_consistency},
      {"curvature sign", curvature_sign},
      {"integrated-intensity oracle", quadrature_oracle},
      {"parameter recovery", parameter_recovery},
      {"regression estimator", regression_estimator},
      {"simulation correctness", simulation_correctness},
      {"k-means oracle", kmeans_oracle},
      {"full dataset (data-optional)", full_dataset},
      {"manifest replay", manifest_replay},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failures += o.status == Status::fail ? 1 : 0;
    std::cout << tag << "  " << i + 1 << ". " << criteria[i].first << ": " << o.detail << " ["
              << sci(seconds_since(start)) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
