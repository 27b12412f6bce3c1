// Serial reference loops against their OpenMP versions. Run with
// OMP_NUM_THREADS set to the core count; each pair shares one argument range.

#include <vector>

#include <benchmark/benchmark.h>

#include "chartpulse/analytics.hpp"
#include "chartpulse/chart.hpp"
#include "chartpulse/clustering.hpp"
#include "chartpulse/kernels.hpp"
#include "chartpulse/random.hpp"
#include "chartpulse/simulation.hpp"

namespace {

using namespace chartpulse;

const IntensityParams kParams{1e5, {{0.0, 5e6, 0.05}, {60.0, 2e6, 0.08}, {200.0, 1e6, 0.3}}};

CountSeries series_of(int days) {
  return CountSeries::from_counts(simulate_daily_counts(kParams, SimConfig{DayGrid{1.0, days}, 1}));
}

void likelihood(benchmark::State& state, Exec exec) {
  const auto series = series_of(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_likelihood(kParams, series, 1.0, Derivatives::hessian, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void expected_counts(benchmark::State& state, Exec exec) {
  const DayGrid grid{1.0, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(expected_daily_counts(kParams, grid, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void simulation(benchmark::State& state, Exec exec) {
  const SimConfig cfg{DayGrid{1.0, static_cast<int>(state.range(0))}, 7};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_daily_counts(kParams, cfg, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void assignment(benchmark::State& state, Exec exec) {
  Rng rng(3);
  std::vector<kernels::Point> points(static_cast<std::size_t>(state.range(0)));
  for (auto& p : points) p = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
  const std::vector<kernels::Point> centroids(points.begin(), points.begin() + 8);
  std::vector<int> assign(points.size(), -1);
  std::vector<double> dist(points.size());
  for (auto _ : state) benchmark::DoNotOptimize(assign_nearest(points, centroids, assign, dist, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

ChartDataset synthetic_chart(int days, int size) {
  Rng rng(5);
  std::vector<ChartEntry> entries;
  const Date start = parse_date("2017-01-01");
  for (int d = 0; d < days; ++d) {
    for (int p = 1; p <= size; ++p) {
      const auto song = (static_cast<std::uint64_t>(p) + rng.below(40) + static_cast<std::uint64_t>(d) / 3) % 4000;
      entries.push_back({start + std::chrono::days(d), p, "Song " + std::to_string(song) + "/" + std::to_string(p),
                         "Artist", static_cast<std::int64_t>(2'000'000 / p)});
    }
  }
  return ChartDataset::from_entries(std::move(entries), size);
}

void rank_stats(benchmark::State& state, Exec exec) {
  const auto ds = synthetic_chart(static_cast<int>(state.range(0)), 200);
  for (auto _ : state) benchmark::DoNotOptimize(rank_stream_stats(ds, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}

void features(benchmark::State& state, Exec exec) {
  const auto ds = synthetic_chart(static_cast<int>(state.range(0)), 200);
  for (auto _ : state) benchmark::DoNotOptimize(build_features(ds, 14, exec));
}

}  // namespace

BENCHMARK_CAPTURE(likelihood, serial, Exec::serial)->Arg(400)->Arg(100'000);
BENCHMARK_CAPTURE(likelihood, parallel, Exec::parallel)->Arg(400)->Arg(100'000);
BENCHMARK_CAPTURE(expected_counts, serial, Exec::serial)->Arg(400)->Arg(100'000);
BENCHMARK_CAPTURE(expected_counts, parallel, Exec::parallel)->Arg(400)->Arg(100'000);
BENCHMARK_CAPTURE(simulation, serial, Exec::serial)->Arg(400)->Arg(20'000);
BENCHMARK_CAPTURE(simulation, parallel, Exec::parallel)->Arg(400)->Arg(20'000);
BENCHMARK_CAPTURE(assignment, serial, Exec::serial)->Arg(1'000)->Arg(1'000'000);
BENCHMARK_CAPTURE(assignment, parallel, Exec::parallel)->Arg(1'000)->Arg(1'000'000);
BENCHMARK_CAPTURE(rank_stats, serial, Exec::serial)->Arg(620);
BENCHMARK_CAPTURE(rank_stats, parallel, Exec::parallel)->Arg(620);
BENCHMARK_CAPTURE(features, serial, Exec::serial)->Arg(620)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(features, parallel, Exec::parallel)->Arg(620)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
