#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>

namespace lorafmar {

// Signed span of simulated time with 1 us resolution.
class Duration {
 public:
  constexpr Duration() = default;

  static constexpr Duration microseconds(std::int64_t us) { return Duration(us); }
  static constexpr Duration milliseconds(std::int64_t ms) { return Duration(ms * 1000); }

  // Rounds to the nearest microsecond.
  static Duration seconds(double s) { return Duration(std::llround(s * 1e6)); }
  static Duration from_ms(double ms) { return Duration(std::llround(ms * 1e3)); }

  static constexpr Duration zero() { return Duration(0); }
  static constexpr Duration max() { return Duration(std::numeric_limits<std::int64_t>::max()); }

  constexpr std::int64_t count() const { return us_; }
  constexpr double to_seconds() const { return static_cast<double>(us_) * 1e-6; }
  constexpr double to_ms() const { return static_cast<double>(us_) * 1e-3; }

  constexpr Duration operator+(Duration o) const { return Duration(us_ + o.us_); }
  constexpr Duration operator-(Duration o) const { return Duration(us_ - o.us_); }
  constexpr Duration operator-() const { return Duration(-us_); }
  constexpr Duration& operator+=(Duration o) { us_ += o.us_; return *this; }
  constexpr Duration& operator-=(Duration o) { us_ -= o.us_; return *this; }
  constexpr Duration operator*(std::int64_t k) const { return Duration(us_ * k); }

  constexpr auto operator<=>(const Duration&) const = default;

 private:
  constexpr explicit Duration(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

// Absolute simulated instant, microseconds since the start of the run.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_us(std::int64_t us) { return SimTime(us); }
  static SimTime from_seconds(double s) { return SimTime(std::llround(s * 1e6)); }
  static constexpr SimTime zero() { return SimTime(0); }
  static constexpr SimTime max() { return SimTime(std::numeric_limits<std::int64_t>::max()); }

  constexpr std::int64_t ticks() const { return ticks_; }
  constexpr double to_seconds() const { return static_cast<double>(ticks_) * 1e-6; }

  constexpr SimTime operator+(Duration d) const { return SimTime(ticks_ + d.count()); }
  constexpr SimTime operator-(Duration d) const { return SimTime(ticks_ - d.count()); }
  constexpr Duration operator-(SimTime o) const { return Duration::microseconds(ticks_ - o.ticks_); }
  constexpr SimTime& operator+=(Duration d) { ticks_ += d.count(); return *this; }

  constexpr auto operator<=>(const SimTime&) const = default;

 private:
  constexpr explicit SimTime(std::int64_t t) : ticks_(t) {}
  std::int64_t ticks_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Duration d) { return os << d.to_ms() << " ms"; }
inline std::ostream& operator<<(std::ostream& os, SimTime t) { return os << t.to_seconds() << " s"; }

}  // namespace lorafmar
