#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>

#include "lorafmar/core/time.hpp"

namespace lorafmar {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// One independent pseudo-random stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The transforms to uniform and normal variates are done here
// rather than with <random> distributions, whose algorithms vary between
// standard library implementations; this keeps traces bit-identical for a
// given seed on every toolchain.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Substream keyed by a name (e.g. "device/ED3/clock"). Distinct names give
  // statistically independent sequences under the same root seed.
  static RandomStream derive(std::uint64_t root_seed, std::string_view name) {
    return RandomStream(detail::splitmix64(root_seed ^ detail::splitmix64(detail::fnv1a64(name))));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Marsaglia polar method.
  double standard_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// One draw from N(mean, sigma). sigma == 0 returns mean exactly and does not
// consume randomness.
inline Duration sample_gaussian(RandomStream& rng, Duration mean, Duration sigma) {
  if (sigma < Duration::zero()) throw std::invalid_argument("sample_gaussian: negative sigma");
  if (sigma == Duration::zero()) return mean;
  return mean + Duration::seconds(sigma.to_seconds() * rng.standard_normal());
}

// Gaussian interarrival clamped from below so the engine never schedules
// backwards (or implausibly close) when the tail goes negative.
inline Duration sample_interarrival(RandomStream& rng, Duration mean, Duration sigma, Duration floor) {
  const Duration d = sample_gaussian(rng, mean, sigma);
  return d < floor ? floor : d;
}

}  // namespace lorafmar
