#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lorafmar/core/time.hpp"

namespace lorafmar {

// Single-threaded discrete-event queue. Events fire in (at, seq) order where
// seq is the insertion counter, so simultaneous events keep FIFO order.
template <typename Payload>
class Scheduler {
 public:
  struct Event {
    SimTime at;
    std::uint64_t seq = 0;
    Payload payload;
  };

  SimTime now() const { return now_; }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t processed() const { return processed_; }

  // Scheduling before now() is a logic error in the caller.
  void schedule(SimTime at, Payload payload) {
    if (at < now_) {
      throw std::logic_error("Scheduler: event at " + std::to_string(at.ticks()) +
                             " us is before current time " + std::to_string(now_.ticks()) + " us");
    }
    queue_.push(Event{at, next_seq_++, std::move(payload)});
  }

  void schedule_in(Duration delay, Payload payload) { schedule(now_ + delay, std::move(payload)); }

  // Processes every event with at <= end, then leaves the clock at end.
  // handler(const Event&) may schedule further events. Returns the number of
  // events processed by this call.
  template <typename Handler>
  std::uint64_t run_until(SimTime end, Handler&& handler) {
    std::uint64_t n = 0;
    stop_requested_ = false;
    while (!queue_.empty() && queue_.top().at <= end && !stop_requested_) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.at;
      handler(static_cast<const Event&>(ev));
      ++n;
    }
    processed_ += n;
    if (!stop_requested_ && end > now_) now_ = end;
    return n;
  }

  // Stops run_until after the current event; the clock stays at that event.
  void request_stop() { stop_requested_ = true; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  SimTime now_ = SimTime::zero();
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  bool stop_requested_ = false;
};

}  // namespace lorafmar
