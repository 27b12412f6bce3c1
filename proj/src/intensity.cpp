#include "chartpulse/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chartpulse {

void IntensityParams::validate() const {
  if (!(baseline >= 0.0) || !std::isfinite(baseline)) {
    throw std::invalid_argument("baseline rate must be finite and non-negative");
  }
  for (std::size_t j = 0; j < events.size(); ++j) {
    const auto& e = events[j];
    if (!(e.time >= 0.0) || !std::isfinite(e.time)) {
      throw std::invalid_argument("event " + std::to_string(j) + ": time must be >= 0");
    }
    if (!(e.size > 0.0) || !std::isfinite(e.size)) {
      throw std::invalid_argument("event " + std::to_string(j) + ": size must be > 0");
    }
    if (!(e.decay > 0.0) || !std::isfinite(e.decay)) {
      throw std::invalid_argument("event " + std::to_string(j) + ": decay must be > 0");
    }
    if (j > 0 && !(e.time > events[j - 1].time)) {
      throw std::invalid_argument("event times must be strictly increasing");
    }
  }
}

void DayGrid::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be > 0");
  if (days < 1) throw std::invalid_argument("grid needs at least one day");
}

double intensity_at(const IntensityParams& params, double t) {
  double rate = params.baseline;
  for (const auto& e : params.events) {
    if (t >= e.time) rate += e.size * e.decay * std::exp(-e.decay * (t - e.time));
  }
  return rate;
}

double event_day_mass(const JumpEvent& event, int day, double delta) {
  const double hi = std::max(delta * day - event.time, 0.0);
  if (hi <= 0.0) return 0.0;
  const double lo = std::max(delta * (day - 1) - event.time, 0.0);
  // exp(-b lo) - exp(-b hi) without cancellation for large lo
  return event.size * std::exp(-event.decay * lo) * -std::expm1(-event.decay * (hi - lo));
}

double integrated_intensity(const IntensityParams& params, int day, double delta) {
  double mass = params.baseline * delta;
  for (const auto& e : params.events) mass += event_day_mass(e, day, delta);
  return mass;
}

std::vector<double> expected_daily_counts(const IntensityParams& params, const DayGrid& grid,
                                          Exec exec) {
  grid.validate();
  std::vector<double> out(static_cast<std::size_t>(grid.days));
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 1; i <= grid.days; ++i) {
      out[static_cast<std::size_t>(i - 1)] = integrated_intensity(params, i, grid.delta);
    }
  } else {
    for (int i = 1; i <= grid.days; ++i) {
      out[static_cast<std::size_t>(i - 1)] = integrated_intensity(params, i, grid.delta);
    }
  }
  return out;
}

double expected_total(const IntensityParams& params, const DayGrid& grid) {
  const double horizon = grid.delta * grid.days;
  double total = params.baseline * horizon;
  for (const auto& e : params.events) {
    total += e.size * -std::expm1(-e.decay * std::max(horizon - e.time, 0.0));
  }
  return total;
}

void to_json(nlohmann::json& j, const JumpEvent& e) {
  j = nlohmann::json{{"a", e.time}, {"theta", e.size}, {"beta", e.decay}};
}

void from_json(const nlohmann::json& j, JumpEvent& e) {
  e.time = j.at("a").get<double>();
  e.size = j.at("theta").get<double>();
  e.decay = j.at("beta").get<double>();
}

void to_json(nlohmann::json& j, const IntensityParams& p) {
  j = nlohmann::json{{"lambda", p.baseline}, {"events", p.events}};
}

void from_json(const nlohmann::json& j, IntensityParams& p) {
  p.baseline = j.at("lambda").get<double>();
  p.events = j.contains("events") ? j.at("events").get<std::vector<JumpEvent>>()
                                  : std::vector<JumpEvent>{};
  p.validate();
}

}  // namespace chartpulse
