#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lorafmar/core/random.hpp"
#include "lorafmar/core/time.hpp"

namespace lorafmar::sensor {

enum class Species { methane, propane, butane, co, o2 };

inline std::string_view to_string(Species s) {
  switch (s) {
    case Species::methane: return "methane";
    case Species::propane: return "propane";
    case Species::butane: return "butane";
    case Species::co: return "CO";
    case Species::o2: return "O2";
  }
  return "?";
}

inline Species species_from_string(std::string_view s) {
  if (s == "methane") return Species::methane;
  if (s == "propane") return Species::propane;
  if (s == "butane") return Species::butane;
  if (s == "CO" || s == "co") return Species::co;
  if (s == "O2" || s == "o2") return Species::o2;
  throw std::invalid_argument("unknown gas species '" + std::string(s) + "'");
}

inline bool is_combustible(Species s) {
  return s == Species::methane || s == Species::propane || s == Species::butane;
}

// Lower explosive limit, % by volume.
inline double lower_explosive_limit(Species s) {
  switch (s) {
    case Species::methane: return 5.0;
    case Species::propane: return 2.1;
    case Species::butane: return 1.8;
    default: throw std::invalid_argument("no LEL for " + std::string(to_string(s)));
  }
}

struct SensorProfile {
  // Catalytic bead, calibrated in methane.
  double methane_sensitivity_pct_per_volt = 2.0;
  double propane_butane_relative_sensitivity = 1.5;
  double catalytic_alarm_volts = 0.5;
  // Electrochemical CO cell.
  double co_max_ppm = 500.0;
  double co_resolution_ppm = 2.0;
  double co_alarm_ppm = 100.0;  // not a measured value; configurable
  // Electrochemical O2 cell.
  double o2_min_pct = 15.0;
  double o2_max_pct = 21.0;
  double o2_resolution_pct = 0.5;
  double o2_deficiency_pct = 19.0;  // not a measured value; configurable

  bool operator==(const SensorProfile&) const = default;

  // %vol per volt of bridge output.
  double sensitivity(Species s) const {
    if (s == Species::methane) return methane_sensitivity_pct_per_volt;
    if (s == Species::propane || s == Species::butane)
      return methane_sensitivity_pct_per_volt * propane_butane_relative_sensitivity;
    throw std::invalid_argument(std::string(to_string(s)) + " is not read by the catalytic sensor");
  }

  void validate() const {
    if (!(methane_sensitivity_pct_per_volt > 0) || !(propane_butane_relative_sensitivity > 0))
      throw std::invalid_argument("sensor sensitivities must be positive");
    if (!(catalytic_alarm_volts > 0)) throw std::invalid_argument("catalytic alarm threshold must be positive");
    if (co_alarm_ppm < 0 || co_alarm_ppm > co_max_ppm) throw std::invalid_argument("CO alarm outside sensor range");
    if (o2_deficiency_pct < o2_min_pct || o2_deficiency_pct > o2_max_pct)
      throw std::invalid_argument("O2 alarm outside sensor range");
    if (!(co_resolution_ppm > 0) || !(o2_resolution_pct > 0))
      throw std::invalid_argument("sensor resolutions must be positive");
  }
};

// Wheatstone bridge output for a combustible gas concentration.
inline double bridge_voltage(const SensorProfile& profile, Species s, double concentration_pct_vol) {
  if (!is_combustible(s))
    throw std::invalid_argument(std::string(to_string(s)) + " is not read by the catalytic sensor");
  if (concentration_pct_vol < 0) throw std::invalid_argument("negative gas concentration");
  return concentration_pct_vol / profile.sensitivity(s);
}

struct GasEvent {
  SimTime at;
  std::string scope;  // cluster name
  Species species = Species::methane;
  double level = 0;   // %vol for combustibles, ppm for CO, % for O2

  bool operator==(const GasEvent&) const = default;
};

struct AlarmDecision {
  bool alarm = false;
  bool clamped = false;  // reading was outside the sensor range
  double reading = 0;    // after clamping and quantization
};

inline double quantize(double value, double step) { return std::round(value / step) * step; }

// Threshold comparisons are inclusive.
inline AlarmDecision alarm_check(const SensorProfile& p, const GasEvent& e) {
  if (e.level < 0) throw std::invalid_argument("negative gas level");
  AlarmDecision d;
  switch (e.species) {
    case Species::methane:
    case Species::propane:
    case Species::butane: {
      d.reading = bridge_voltage(p, e.species, e.level);
      d.alarm = d.reading >= p.catalytic_alarm_volts;
      break;
    }
    case Species::co: {
      double level = e.level;
      if (level > p.co_max_ppm) {
        level = p.co_max_ppm;
        d.clamped = true;
      }
      d.reading = quantize(level, p.co_resolution_ppm);
      d.alarm = d.reading >= p.co_alarm_ppm;
      break;
    }
    case Species::o2: {
      double level = e.level;
      if (level < p.o2_min_pct || level > p.o2_max_pct) {
        level = std::clamp(level, p.o2_min_pct, p.o2_max_pct);
        d.clamped = true;
      }
      d.reading = quantize(level, p.o2_resolution_pct);
      d.alarm = d.reading <= p.o2_deficiency_pct;
      break;
    }
  }
  return d;
}

// Source of gas events: an explicit script, or a renewal process with
// interarrivals uniform on [min, max] that always fires the same reading.
struct EventSource {
  struct Scripted {
    std::vector<GasEvent> events;  // times ascending
  };
  struct Periodic {
    std::string scope;
    Duration min_interval = Duration::seconds(120);
    Duration max_interval = Duration::seconds(130);
    Species species = Species::methane;
    double level = 2.0;
    std::optional<Duration> first_at;  // unset: one interarrival after t=0

    bool operator==(const Periodic&) const = default;
  };

  std::optional<Scripted> scripted;
  std::optional<Periodic> periodic;
};

class EventGenerator {
 public:
  EventGenerator(EventSource src, RandomStream rng) : src_(std::move(src)), rng_(std::move(rng)) {
    if (src_.scripted.has_value() == src_.periodic.has_value())
      throw std::invalid_argument("event source must be either scripted or periodic");
    if (src_.periodic) {
      const auto& p = *src_.periodic;
      if (p.min_interval <= Duration::zero() || p.max_interval < p.min_interval)
        throw std::invalid_argument("periodic events need 0 < min_interval <= max_interval");
    }
  }

  // Next event strictly after the previous one, or nothing when the script
  // is exhausted.
  std::optional<GasEvent> next() {
    if (src_.scripted) {
      if (index_ >= src_.scripted->events.size()) return std::nullopt;
      return src_.scripted->events[index_++];
    }
    const auto& p = *src_.periodic;
    if (index_++ == 0 && p.first_at) {
      last_ = SimTime::zero() + *p.first_at;
    } else {
      const double gap = rng_.uniform(p.min_interval.to_seconds(), p.max_interval.to_seconds());
      last_ = last_ + Duration::seconds(gap);
    }
    return GasEvent{last_, p.scope, p.species, p.level};
  }

 private:
  EventSource src_;
  RandomStream rng_;
  std::size_t index_ = 0;
  SimTime last_ = SimTime::zero();
};

}  // namespace lorafmar::sensor
