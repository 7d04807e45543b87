#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lorafmar/core/error.hpp"

// Loss of urgent uplinks to downlink preemption when DCPs form a renewal
// process with Gaussian interarrivals r ~ N(T, sigma). An UP of length D is
// lost iff some DCP of length tau starts within (UP start - tau, UP end).
namespace lorafmar::analytic {

// Discrete distribution over airtimes (seconds).
struct AirtimeMix {
  std::vector<std::pair<double, double>> points;  // (airtime_s, probability)

  static AirtimeMix point(double airtime_s) { return AirtimeMix{{{airtime_s, 1.0}}}; }

  double mean() const {
    double m = 0;
    for (auto [t, p] : points) m += t * p;
    return m;
  }
  double max() const {
    double m = 0;
    for (auto [t, p] : points) m = std::max(m, t);
    return m;
  }

  void validate(std::string_view what) const {
    if (points.empty()) throw std::invalid_argument(std::string(what) + ": empty distribution");
    double sum = 0;
    for (auto [t, p] : points) {
      if (!(t > 0)) throw std::invalid_argument(std::string(what) + ": airtimes must be positive");
      if (p < 0) throw std::invalid_argument(std::string(what) + ": negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument(std::string(what) + ": probabilities must sum to 1");
  }
};

struct PlrModelParams {
  int devices = 0;          // N
  double period_s = 70.0;   // T
  double sigma_s = 0.05;    // clock error std
  AirtimeMix dcp_airtime;   // tau
  AirtimeMix up_airtime;    // D

  void validate() const {
    if (devices < 0) throw std::invalid_argument("device count must be non-negative");
    if (!(period_s > 0)) throw std::invalid_argument("period must be positive");
    if (sigma_s < 0) throw std::invalid_argument("sigma must be non-negative");
    dcp_airtime.validate("DCP airtime");
    up_airtime.validate("UP airtime");
  }
};

enum class Method { exact_fixed, marginal, approx };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::exact_fixed: return "exact-fixed";
    case Method::marginal: return "marginal";
    case Method::approx: return "approx";
  }
  return "?";
}

inline Method method_from_string(std::string_view s) {
  if (s == "exact" || s == "exact-fixed") return Method::exact_fixed;
  if (s == "marginal") return Method::marginal;
  if (s == "approx") return Method::approx;
  throw std::invalid_argument("unknown method '" + std::string(s) + "' (exact, marginal, approx)");
}

struct PlrResult {
  double p_collision_free = 1.0;
  double plr = 0.0;
  Method method = Method::approx;
  bool in_regime = true;  // tau + D < T - 5 sigma for every window length used
};

// Renewal interarrival cdf F_r(x) for r ~ N(T, sigma); a step at T when sigma = 0.
inline double interarrival_cdf(double x, double period_s, double sigma_s) {
  if (sigma_s == 0) return x < period_s ? 0.0 : 1.0;
  return 0.5 * std::erfc(-(x - period_s) / (sigma_s * std::numbers::sqrt2));
}

// Asymptotic density of the time to the next arrival seen from a random
// instant: w(x) = (1 - F_r(x)) / T.
inline double residual_density(double x, double period_s, double sigma_s) {
  if (x < 0) throw std::invalid_argument("residual_density: x must be non-negative");
  if (!(period_s > 0)) throw std::invalid_argument("residual_density: period must be positive");
  return (1.0 - interarrival_cdf(x, period_s, sigma_s)) / period_s;
}

inline constexpr double kQuadratureTolerance = 1e-10;

// Integral of (1 - F_r(x)) over [0, upper], adaptive G7/K15. The
// integrand is flat (= 1) well below T - 8 sigma, so that stretch is taken
// analytically and only the tail region goes to quadrature.
inline double survival_integral(double upper, double period_s, double sigma_s) {
  if (upper <= 0) return 0.0;
  if (sigma_s == 0) return std::min(upper, period_s);
  const double flat_end = std::clamp(period_s - 8.0 * sigma_s, 0.0, upper);
  double result = flat_end;
  if (upper > flat_end) {
    auto f = [&](double x) { return 1.0 - interarrival_cdf(x, period_s, sigma_s); };
    double err = 0;
    result += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, flat_end, upper, 30,
                                                                            kQuadratureTolerance, &err);
  }
  return result;
}

inline bool within_regime(double window_s, double period_s, double sigma_s) {
  return window_s < period_s - 5.0 * sigma_s;
}

inline void require_regime(double window_s, double period_s, double sigma_s) {
  if (!within_regime(window_s, period_s, sigma_s))
    throw ModelRegimeError("tau + D = " + std::to_string(window_s) + " s violates tau + D < T - 5 sigma (T = " +
                           std::to_string(period_s) + " s, sigma = " + std::to_string(sigma_s) + " s)");
}

// Per-DCP-source probability that no DCP hits an UP window of this length.
inline double window_clear_probability(double window_s, double period_s, double sigma_s) {
  const double factor = 1.0 - survival_integral(window_s, period_s, sigma_s) / period_s;
  if (!(factor > 0)) throw ModelRegimeError("collision-free factor is not positive; window too long for the period");
  return factor;
}

// Fixed per-source DCP airtimes: P_C = prod_n (1 - (1/T) int_0^{tau_n + D} (1 - F_r)).
inline PlrResult plr_exact_fixed(std::span<const double> taus_s, double up_airtime_s, double period_s,
                                 double sigma_s) {
  if (!(period_s > 0)) throw std::invalid_argument("period must be positive");
  if (sigma_s < 0) throw std::invalid_argument("sigma must be non-negative");
  if (!(up_airtime_s > 0)) throw std::invalid_argument("UP airtime must be positive");
  PlrResult r;
  r.method = Method::exact_fixed;
  double pc = 1.0;
  for (double tau : taus_s) {
    if (!(tau > 0)) throw std::invalid_argument("DCP airtimes must be positive");
    require_regime(tau + up_airtime_s, period_s, sigma_s);
    pc *= window_clear_probability(tau + up_airtime_s, period_s, sigma_s);
  }
  r.p_collision_free = pc;
  r.plr = 1.0 - pc;
  return r;
}

// IID airtimes: P_C = [sum_t sum_y p_tau(t) p_D(y) (1 - (1/T) int_0^{t+y} (1 - F_r))]^N.
inline PlrResult plr_marginal(const PlrModelParams& params) {
  params.validate();
  PlrResult r;
  r.method = Method::marginal;
  if (params.devices == 0) return r;
  double avg = 0;
  for (auto [t, pt] : params.dcp_airtime.points)
    for (auto [y, py] : params.up_airtime.points) {
      require_regime(t + y, params.period_s, params.sigma_s);
      avg += pt * py * window_clear_probability(t + y, params.period_s, params.sigma_s);
    }
  r.p_collision_free = std::pow(avg, params.devices);
  r.plr = 1.0 - r.p_collision_free;
  return r;
}

// Small-PLR form: PLR ~ N (E[tau] + E[D]) / T. p_collision_free reports
// (1 - (E[tau] + E[D]) / T)^N, so plr != 1 - p_collision_free here.
inline PlrResult plr_approx(int devices, double mean_tau_s, double mean_d_s, double period_s) {
  if (!(period_s > 0)) throw std::invalid_argument("period must be positive");
  if (devices < 0) throw std::invalid_argument("device count must be non-negative");
  PlrResult r;
  r.method = Method::approx;
  const double frac = (mean_tau_s + mean_d_s) / period_s;
  r.plr = devices * frac;
  r.p_collision_free = std::pow(1.0 - frac, devices);
  r.in_regime = within_regime(mean_tau_s + mean_d_s, period_s, 0.0);
  return r;
}

inline PlrResult evaluate(const PlrModelParams& p, Method m) {
  p.validate();
  switch (m) {
    case Method::exact_fixed: {
      // Every source transmits the mean DCP airtime and the UP the mean D;
      // use plr_exact_fixed directly for heterogeneous fixed airtimes.
      std::vector<double> taus(static_cast<std::size_t>(p.devices), p.dcp_airtime.mean());
      return plr_exact_fixed(taus, p.up_airtime.mean(), p.period_s, p.sigma_s);
    }
    case Method::marginal: return plr_marginal(p);
    case Method::approx: {
      auto r = plr_approx(p.devices, p.dcp_airtime.mean(), p.up_airtime.mean(), p.period_s);
      r.in_regime = within_regime(p.dcp_airtime.max() + p.up_airtime.max(), p.period_s, p.sigma_s);
      return r;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace lorafmar::analytic
