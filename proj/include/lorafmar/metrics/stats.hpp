#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lorafmar/core/time.hpp"

namespace lorafmar::metrics {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lo = 0;
  double hi = 0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

// Wilson score interval for a binomial proportion k / n.
inline Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z = kZ95) {
  if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
  if (k > n) throw std::invalid_argument("wilson_interval: k exceeds n");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct PlrEstimate {
  double estimate = 0;
  Interval ci95;
};

inline PlrEstimate plr(std::uint64_t delivered, std::uint64_t generated) {
  if (generated == 0) throw std::invalid_argument("plr: no packets generated");
  if (delivered > generated) throw std::invalid_argument("plr: delivered exceeds generated");
  const std::uint64_t lost = generated - delivered;
  return {static_cast<double>(lost) / static_cast<double>(generated), wilson_interval(lost, generated)};
}

struct LatencySummary {
  std::uint64_t count = 0;
  Duration p50, p95, p99, max;
};

// Nearest-rank quantiles.
inline LatencySummary summarize_latency(std::vector<Duration> samples) {
  LatencySummary s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(idx, 1, samples.size()) - 1];
  };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  s.p99 = rank(0.99);
  s.max = samples.back();
  return s;
}

// Trigger-to-server latency of a delivered UP.
inline Duration latency_of(SimTime trigger, SimTime airtime_start, Duration airtime, Duration backhaul) {
  if (airtime_start < trigger) throw std::invalid_argument("latency_of: transmission before trigger");
  return (airtime_start - trigger) + airtime + backhaul;
}

}  // namespace lorafmar::metrics
