#pragma once

#include <vector>

#include <json.hpp>

#include "chartpulse/exec.hpp"

namespace chartpulse {

/// Exogenous jump adding size * decay * exp(-decay * (t - time)) to the
/// intensity from `time` onwards. `size` is the total expected number of
/// extra streams the jump contributes.
struct JumpEvent {
  double time = 0.0;
  double size = 0.0;
  double decay = 0.0;

  bool operator==(const JumpEvent&) const = default;
};

/// Baseline rate plus time-ordered jump events.
struct IntensityParams {
  double baseline = 0.0;
  std::vector<JumpEvent> events;

  /// Throws std::invalid_argument if baseline < 0, any size or decay <= 0,
  /// any time < 0, or event times are not strictly increasing.
  void validate() const;

  bool operator==(const IntensityParams&) const = default;
};

/// `days` consecutive days of length `delta` starting at t = 0.
struct DayGrid {
  double delta = 1.0;
  int days = 1;

  void validate() const;
};

/// lambda(t) = baseline + sum_j size_j * decay_j * exp(-decay_j (t - time_j)) 1{t >= time_j}
double intensity_at(const IntensityParams& params, double t);

/// Expected extra streams from one event on day `day` (1-based), the integral
/// of its term over [delta (day - 1), delta day].
double event_day_mass(const JumpEvent& event, int day, double delta);

/// Integral of lambda(t) over [delta (day - 1), delta day].
double integrated_intensity(const IntensityParams& params, int day, double delta);

/// integrated_intensity for days 1..grid.days.
std::vector<double> expected_daily_counts(const IntensityParams& params, const DayGrid& grid,
                                          Exec exec = Exec::serial);

/// Closed form of the sum of expected_daily_counts over the whole grid.
double expected_total(const IntensityParams& params, const DayGrid& grid);

void to_json(nlohmann::json& j, const JumpEvent& e);
void from_json(const nlohmann::json& j, JumpEvent& e);
void to_json(nlohmann::json& j, const IntensityParams& p);
/// Reads {"lambda": ..., "events": [{"a", "theta", "beta"}, ...]} and validates.
void from_json(const nlohmann::json& j, IntensityParams& p);

}  // namespace chartpulse
