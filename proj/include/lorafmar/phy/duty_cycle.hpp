#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lorafmar/core/time.hpp"
#include "lorafmar/phy/channel_plan.hpp"

namespace lorafmar::phy {

enum class DutyCyclePolicy {
  // After a transmission of length t ending at e the whole sub-band is
  // closed until e + t * (1/d - 1).
  off_period,
  // Transmitted time inside any trailing window must stay below d * window.
  sliding_window,
};

inline std::string_view to_string(DutyCyclePolicy p) {
  return p == DutyCyclePolicy::off_period ? "off-period" : "sliding-window";
}

inline DutyCyclePolicy duty_cycle_policy_from_string(std::string_view s) {
  if (s == "off-period") return DutyCyclePolicy::off_period;
  if (s == "sliding-window") return DutyCyclePolicy::sliding_window;
  throw std::invalid_argument("unknown duty-cycle policy '" + std::string(s) + "'");
}

struct DutyCycleVerdict {
  bool permitted = true;
  SimTime blocked_until;  // meaningful only when !permitted

  static DutyCycleVerdict ok() { return {}; }
  static DutyCycleVerdict blocked(SimTime until) { return {false, until}; }
};

struct AirtimeRecord {
  SimTime start;
  SimTime end;
};

// Per (transmitter, sub-band) transmit-time accounting.
class DutyCycleLedger {
 public:
  explicit DutyCycleLedger(DutyCyclePolicy policy = DutyCyclePolicy::off_period,
                           Duration window = Duration::seconds(3600))
      : policy_(policy), window_(window) {}

  DutyCyclePolicy policy() const { return policy_; }
  Duration window() const { return window_; }

  // `airtime` is the length of the prospective transmission. The off-period
  // policy ignores it; the sliding-window policy needs it to decide whether
  // the new transmission still fits the budget.
  DutyCycleVerdict check(const std::string& transmitter, SubBandId band, SimTime now,
                         Duration airtime = Duration::zero()) const {
    auto it = entries_.find({transmitter, band});
    if (it == entries_.end()) return DutyCycleVerdict::ok();
    const Entry& e = it->second;
    if (policy_ == DutyCyclePolicy::off_period) {
      if (now >= e.next_allowed) return DutyCycleVerdict::ok();
      return DutyCycleVerdict::blocked(e.next_allowed);
    }
    if (now < e.last_end) return DutyCycleVerdict::blocked(e.last_end);
    const Duration budget = window_budget(band);
    if (busy_in_window(e, now) + airtime <= budget) return DutyCycleVerdict::ok();
    // Past busy time inside [t - W, t] only shrinks as t grows, so the
    // earliest admissible start can be bisected.
    std::int64_t lo = now.ticks(), hi = (now + window_).ticks();
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (busy_in_window(e, SimTime::from_us(mid)) + airtime <= budget)
        hi = mid;
      else
        lo = mid;
    }
    return DutyCycleVerdict::blocked(SimTime::from_us(hi));
  }

  // Throws std::logic_error if the transmission was not permitted.
  void record(const std::string& transmitter, SubBandId band, SimTime start, Duration airtime) {
    if (!check(transmitter, band, start, airtime).permitted)
      throw std::logic_error("duty-cycle violation: " + transmitter + " on " + std::string(to_string(band)) +
                             " at " + std::to_string(start.ticks()) + " us");
    Entry& e = entries_[{transmitter, band}];
    const SimTime end = start + airtime;
    const double d = duty_cycle_limit(band);
    e.next_allowed = end + Duration::seconds(airtime.to_seconds() * (1.0 / d - 1.0));
    e.last_end = end;
    e.log.push_back({start, end});
    e.total_airtime += airtime;
  }

  SimTime next_allowed_time(const std::string& transmitter, SubBandId band) const {
    auto it = entries_.find({transmitter, band});
    return it == entries_.end() ? SimTime::zero() : it->second.next_allowed;
  }

  const std::vector<AirtimeRecord>& log(const std::string& transmitter, SubBandId band) const {
    static const std::vector<AirtimeRecord> empty;
    auto it = entries_.find({transmitter, band});
    return it == entries_.end() ? empty : it->second.log;
  }

  Duration total_airtime(const std::string& transmitter, SubBandId band) const {
    auto it = entries_.find({transmitter, band});
    return it == entries_.end() ? Duration::zero() : it->second.total_airtime;
  }

  // Transmitted time overlapping [from, to).
  Duration busy_time(const std::string& transmitter, SubBandId band, SimTime from, SimTime to) const {
    Duration sum = Duration::zero();
    for (const auto& r : log(transmitter, band)) {
      const SimTime s = std::max(r.start, from);
      const SimTime t = std::min(r.end, to);
      if (t > s) sum += t - s;
    }
    return sum;
  }

 private:
  struct Entry {
    SimTime next_allowed = SimTime::zero();
    SimTime last_end = SimTime::zero();
    std::vector<AirtimeRecord> log;
    Duration total_airtime = Duration::zero();
  };

  Duration window_budget(SubBandId band) const {
    return Duration::seconds(window_.to_seconds() * duty_cycle_limit(band));
  }

  Duration busy_in_window(const Entry& e, SimTime t) const {
    const SimTime from = t - window_;
    Duration sum = Duration::zero();
    for (auto it = e.log.rbegin(); it != e.log.rend(); ++it) {
      if (it->end <= from) break;
      const SimTime s = std::max(it->start, from);
      const SimTime u = std::min(it->end, t);
      if (u > s) sum += u - s;
    }
    return sum;
  }

  DutyCyclePolicy policy_;
  Duration window_;
  std::map<std::pair<std::string, SubBandId>, Entry> entries_;
};

}  // namespace lorafmar::phy
