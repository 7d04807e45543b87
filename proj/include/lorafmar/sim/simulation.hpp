#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lorafmar/core/random.hpp"
#include "lorafmar/core/scheduler.hpp"
#include "lorafmar/device/end_device.hpp"
#include "lorafmar/gateway/gateway.hpp"
#include "lorafmar/metrics/report.hpp"
#include "lorafmar/sensor/gas_sensor.hpp"
#include "lorafmar/server/network_server.hpp"
#include "lorafmar/sim/scenario.hpp"

namespace lorafmar::sim {

// Optional observation hooks for tests and audits.
struct TraceHooks {
  std::function<void(const phy::Transmission&)> on_transmission;
  std::function<void(const phy::Transmission&, const std::string& gateway, Cause)> on_gateway_verdict;
  std::function<void(const std::string& device, const device::DcpPayload&, SimTime)> on_dcp_applied;
  // Called after every processed event with the engine clock.
  std::function<void(SimTime, const std::vector<gateway::Gateway>&)> on_event;
};

namespace detail {

struct RpDue {
  std::size_t device;
};
struct UpStart {
  std::size_t device;
  SimTime trigger;
  std::uint64_t burst;
};
struct UplinkEnd {
  std::uint64_t tx_id;
};
struct ServerReceive {
  server::UplinkFrame frame;
};
struct DownlinkStart {
  std::size_t gateway;
  std::size_t device;
  gateway::DownlinkRequest request;
};
struct DownlinkEnd {
  std::size_t device;
  gateway::DownlinkRequest request;
};
struct GasEventDue {
  std::size_t source;
  sensor::GasEvent event;
};
struct Stop {};

using Payload = std::variant<RpDue, UpStart, UplinkEnd, ServerReceive, DownlinkStart, DownlinkEnd, GasEventDue, Stop>;

}  // namespace detail

// One replication of a scenario. Owns every entity; single-threaded.
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, std::uint64_t seed, TraceHooks hooks = {})
      : cfg_(validated(cfg)),
        seed_(seed),
        hooks_(std::move(hooks)),
        plan_(cfg.channel_plan()),
        capture_(cfg.capture.build()),
        device_ledger_(cfg.duty_cycle.device_policy, cfg.duty_cycle.window),
        gateway_ledger_(cfg.duty_cycle.gateway_policy, cfg.duty_cycle.window),
        server_(cfg.clusters, device_profiles(cfg), plan_.rx2_channel(), cfg.dcp_phy_payload) {
    for (std::size_t i = 0; i < cfg.devices.size(); ++i) {
      const auto& d = cfg.devices[i];
      devices_.emplace_back(d.radio);
      device_index_[d.radio.name] = i;
      clock_rng_.push_back(RandomStream::derive(seed, "device/" + d.radio.name + "/clock"));
      channel_rng_.push_back(RandomStream::derive(seed, "device/" + d.radio.name + "/channel"));
      std::vector<std::size_t> hears;
      for (std::size_t g = 0; g < cfg.gateways.size(); ++g)
        if (d.gateways.empty() ||
            std::find(d.gateways.begin(), d.gateways.end(), cfg.gateways[g].name) != d.gateways.end())
          hears.push_back(g);
      coverage_.push_back(std::move(hears));
      report_.devices[d.radio.name];
    }
    for (std::size_t g = 0; g < cfg.gateways.size(); ++g) {
      gateways_.emplace_back(cfg.gateways[g]);
      gateway_index_[cfg.gateways[g].name] = g;
      capture_rng_.push_back(RandomStream::derive(seed, "gateway/" + cfg.gateways[g].name + "/capture"));
      report_.gateways[cfg.gateways[g].name].role = std::string(to_string(cfg.gateways[g].role));
    }
    for (std::size_t i = 0; i < cfg.events.size(); ++i)
      generators_.emplace_back(cfg.events[i].source(), RandomStream::derive(seed, "events/" + std::to_string(i)));

    report_.scenario_name = cfg.name;
    report_.seed = seed;
    report_.assignments = server_.assignments();
  }

  const std::vector<device::EndDevice>& devices() const { return devices_; }
  const std::vector<gateway::Gateway>& gateways() const { return gateways_; }
  const server::NetworkServer& server() const { return server_; }
  const phy::DutyCycleLedger& device_ledger() const { return device_ledger_; }
  const phy::DutyCycleLedger& gateway_ledger() const { return gateway_ledger_; }
  const phy::ChannelPlan& plan() const { return plan_; }
  SimTime now() const { return queue_.now(); }

  // Runs to the configured stop condition and returns the report.
  metrics::RunReport run() {
    auto phase_rng = RandomStream::derive(seed_, "phase");
    for (std::size_t i = 0; i < devices_.size(); ++i) {
      const auto& c = devices_[i].config();
      if (!c.sends_rp) continue;
      const Duration offset = c.first_rp_offset
                                  ? *c.first_rp_offset
                                  : Duration::seconds(phase_rng.uniform(0.0, c.rp_period.to_seconds()));
      queue_.schedule(SimTime::zero() + offset, detail::RpDue{i});
    }
    for (std::size_t s = 0; s < generators_.size(); ++s) schedule_next_gas_event(s);

    // Hard cap so a scenario whose events never alarm still terminates.
    const SimTime horizon = cfg_.stop.duration ? SimTime::zero() + *cfg_.stop.duration
                                               : SimTime::zero() + Duration::seconds(10.0 * 365 * 86400);
    queue_.run_until(horizon, [this](const auto& ev) {
      std::visit([this](const auto& p) { handle(p); }, ev.payload);
      if (hooks_.on_event) hooks_.on_event(queue_.now(), gateways_);
    });
    finish();
    return report_;
  }

 private:
  static ScenarioConfig validated(const ScenarioConfig& cfg) {
    cfg.validate();
    return cfg;
  }

  static std::map<std::string, server::DeviceProfile> device_profiles(const ScenarioConfig& cfg) {
    std::map<std::string, server::DeviceProfile> m;
    for (const auto& d : cfg.devices)
      m[d.radio.name] = server::DeviceProfile{d.radio.cluster, d.radio.receive_delay1, d.radio.receive_delay2};
    return m;
  }

  struct InFlight {
    phy::Transmission tx;
    std::size_t device = 0;
    std::uint64_t seq = 0;
    SimTime trigger;  // UPs only
    std::optional<std::uint64_t> burst;
  };

  struct Burst {
    std::size_t expected = 0;
    std::size_t resolved = 0;
    std::size_t lost = 0;
  };

  void schedule_next_gas_event(std::size_t source) {
    if (stop_alarms_) return;
    if (auto e = generators_[source].next()) {
      if (e->at < queue_.now()) throw std::logic_error("gas event script goes backwards");
      queue_.schedule(e->at, detail::GasEventDue{source, *e});
    }
  }

  void handle(const detail::RpDue& e) {
    auto& dev = devices_[e.device];
    auto attempt = dev.transmit_rp(queue_.now(), channel_rng_[e.device], plan_, device_ledger_, next_tx_id_);
    if (!attempt.tx) {
      ++report_.rp.deferrals;
      queue_.schedule(attempt.deferred_until, detail::RpDue{e.device});
      return;
    }
    ++next_tx_id_;
    ++report_.rp.generated;
    ++report_.devices[dev.name()].rp_generated;
    launch(*attempt.tx, e.device, std::nullopt, queue_.now());
    queue_.schedule(dev.next_rp_time(clock_rng_[e.device], queue_.now()), detail::RpDue{e.device});
  }

  void handle(const detail::GasEventDue& e) {
    const auto decision = sensor::alarm_check(cfg_.sensor, e.event);
    if (decision.alarm && !stop_alarms_) {
      ++report_.alarm_events;
      const auto* cluster = cfg_.find_cluster(e.event.scope);
      const std::uint64_t burst = next_burst_++;
      if (cluster->members.size() >= 2) bursts_[burst].expected = cluster->members.size();
      for (const auto& m : cluster->members) trigger_up(device_index_.at(m), queue_.now(), burst);
      if (cfg_.stop.alarm_events && report_.alarm_events >= *cfg_.stop.alarm_events) {
        stop_alarms_ = true;
        queue_.schedule(queue_.now() + cfg_.stop.drain, detail::Stop{});
      }
    }
    schedule_next_gas_event(e.source);
  }

  // A UP triggered while the device's own uplink is on air waits for it.
  void trigger_up(std::size_t d, SimTime trigger, std::uint64_t burst) {
    const SimTime free_at = devices_[d].radio_free_at();
    if (free_at > queue_.now())
      queue_.schedule(free_at, detail::UpStart{d, trigger, burst});
    else
      handle(detail::UpStart{d, trigger, burst});
  }

  void handle(const detail::UpStart& e) {
    auto& dev = devices_[e.device];
    if (dev.radio_free_at() > queue_.now()) {
      queue_.schedule(dev.radio_free_at(), e);
      return;
    }
    ++report_.up.generated;
    auto& dc = report_.devices[dev.name()];
    ++dc.up_generated;
    auto attempt = dev.transmit_up(queue_.now(), plan_, device_ledger_, next_tx_id_);
    if (!attempt.tx) {
      ++report_.up.losses[attempt.loss];
      burst_resolved(e.burst, false);
      return;
    }
    ++next_tx_id_;
    ++report_.up_transmitted;
    report_.up_airtime_total += attempt.tx->airtime;
    launch(*attempt.tx, e.device, e.burst, e.trigger);
  }

  void launch(const phy::Transmission& tx, std::size_t d, std::optional<std::uint64_t> burst, SimTime trigger) {
    if (hooks_.on_transmission) hooks_.on_transmission(tx);
    InFlight f{tx, d, next_seq_++, trigger, burst};
    for (std::size_t g : coverage_[d]) gateways_[g].on_uplink_start(tx, queue_.now());
    in_flight_.emplace(tx.id, std::move(f));
    queue_.schedule(tx.end(), detail::UplinkEnd{tx.id});
  }

  void handle(const detail::UplinkEnd& e) {
    auto node = in_flight_.extract(e.tx_id);
    const InFlight& f = node.mapped();
    const auto& dev = devices_[f.device];
    std::optional<SimTime> delivered_at;
    std::optional<Cause> rx_only_cause, first_cause;

    for (std::size_t g : coverage_[f.device]) {
      auto& gw = gateways_[g];
      const Cause c = gw.on_uplink_end(f.tx, queue_.now(), capture_, capture_rng_[g]);
      ++report_.gateways[gw.name()].outcomes[f.tx.kind][c];
      if (hooks_.on_gateway_verdict) hooks_.on_gateway_verdict(f.tx, gw.name(), c);
      if (c == Cause::decoded) {
        const SimTime at = queue_.now() + gw.config().backhaul_delay;
        if (!delivered_at || at < *delivered_at) delivered_at = at;
        queue_.schedule(at, detail::ServerReceive{server::UplinkFrame{dev.name(), f.seq, f.tx, gw.name(), at}});
      } else {
        if (!first_cause) first_cause = c;
        if (gw.config().role == gateway::Role::rx_only && !rx_only_cause) rx_only_cause = c;
      }
    }

    // Loss attribution prefers the rx-only gateway's verdict: it is the
    // receiver that is never silenced by downlinks.
    const Cause loss = rx_only_cause.value_or(first_cause.value_or(Cause::collision));
    auto& dc = report_.devices[dev.name()];
    if (f.tx.kind == phy::PacketKind::RP) {
      if (delivered_at) {
        ++report_.rp.delivered;
        ++dc.rp_delivered;
      } else {
        ++report_.rp.losses[loss];
      }
      return;
    }
    if (f.tx.kind != phy::PacketKind::UP) return;
    if (delivered_at) {
      ++report_.up.delivered;
      ++dc.up_delivered;
      const Duration latency = *delivered_at - f.trigger;
      report_.up_latencies.push_back(latency);
      const Duration budget = phy::kUrgentLatencyBudget + (*delivered_at - queue_.now());
      if (latency > budget) ++report_.latency_over_budget;
    } else {
      ++report_.up.losses[loss];
    }
    if (f.burst) burst_resolved(*f.burst, !delivered_at);
  }

  void burst_resolved(std::uint64_t id, bool lost) {
    auto it = bursts_.find(id);
    if (it == bursts_.end()) return;
    auto& b = it->second;
    ++b.resolved;
    if (lost) ++b.lost;
    if (b.resolved < b.expected) return;
    ++report_.bursts.bursts;
    if (b.lost == b.expected) ++report_.bursts.all_lost;
    if (b.lost > 0) ++report_.bursts.any_lost;
    bursts_.erase(it);
  }

  void handle(const detail::ServerReceive& e) {
    const bool first = server_.on_uplink(e.frame);
    if (!first || e.frame.tx.kind != phy::PacketKind::RP) return;
    auto routed = server_.schedule_dcp(e.frame);
    if (!routed) return;
    ++report_.dcp.scheduled;
    const std::size_t g = gateway_index_.at(routed->gateway);
    queue_.schedule(routed->request.must_start_at,
                    detail::DownlinkStart{g, device_index_.at(e.frame.device), std::move(routed->request)});
  }

  void handle(const detail::DownlinkStart& e) {
    auto& gw = gateways_[e.gateway];
    auto res = gw.start_downlink(e.request, queue_.now(), gateway_ledger_, plan_, next_tx_id_);
    if (!res.sent) {
      if (res.skip_cause == Cause::duty_cycle && !e.request.rx2) {
        queue_.schedule(e.request.rx2_at, detail::DownlinkStart{e.gateway, e.device, e.request.as_rx2()});
        return;
      }
      ++report_.dcp.skipped[res.skip_cause];
      return;
    }
    ++next_tx_id_;
    if (hooks_.on_transmission) hooks_.on_transmission(*res.tx);
    ++report_.gateways[gw.name()].downlinks_sent;
    ++(e.request.rx2 ? report_.dcp.sent_rx2 : report_.dcp.sent_rx1);
    queue_.schedule(res.tx->end(), detail::DownlinkEnd{e.device, e.request});
  }

  void handle(const detail::DownlinkEnd& e) {
    auto& dev = devices_[e.device];
    const auto& r = e.request;
    if (!dev.can_receive(r.must_start_at, r.channel, r.params)) return;
    const auto verdict = dev.on_dcp(r.dcp, plan_, queue_.now());
    if (verdict == device::DcpVerdict::accepted) {
      ++report_.dcp.received;
      ++report_.devices[dev.name()].dcp_received;
      if (hooks_.on_dcp_applied) hooks_.on_dcp_applied(dev.name(), r.dcp, queue_.now());
    } else {
      ++report_.dcp.rejected;
    }
  }

  void handle(const detail::Stop&) { queue_.request_stop(); }

  void finish() {
    report_.sim_time_s = queue_.now().to_seconds();
    // Packets still on air at a duration-based stop are not counted.
    for (const auto& [id, f] : in_flight_) {
      if (f.tx.kind == phy::PacketKind::UP) {
        --report_.up.generated;
        --report_.devices[devices_[f.device].name()].up_generated;
      } else if (f.tx.kind == phy::PacketKind::RP) {
        --report_.rp.generated;
        --report_.devices[devices_[f.device].name()].rp_generated;
      }
    }
  }

  ScenarioConfig cfg_;
  std::uint64_t seed_;
  TraceHooks hooks_;
  phy::ChannelPlan plan_;
  phy::CaptureModel capture_;
  phy::DutyCycleLedger device_ledger_;
  phy::DutyCycleLedger gateway_ledger_;
  server::NetworkServer server_;

  std::vector<device::EndDevice> devices_;
  std::vector<gateway::Gateway> gateways_;
  std::vector<sensor::EventGenerator> generators_;
  std::vector<RandomStream> clock_rng_, channel_rng_, capture_rng_;
  std::vector<std::vector<std::size_t>> coverage_;
  std::map<std::string, std::size_t> device_index_, gateway_index_;

  Scheduler<detail::Payload> queue_;
  std::unordered_map<std::uint64_t, InFlight> in_flight_;
  std::unordered_map<std::uint64_t, Burst> bursts_;
  std::uint64_t next_tx_id_ = 1;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_burst_ = 0;
  bool stop_alarms_ = false;
  metrics::RunReport report_;
};

inline metrics::RunReport run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, TraceHooks hooks = {}) {
  Simulation sim(cfg, seed, std::move(hooks));
  return sim.run();
}

// Independent replications with seeds seed, seed+1, ...; runs on up to
// `workers` threads and folds the reports in seed order.
inline metrics::RunReport run_replications(const ScenarioConfig& cfg, std::uint64_t seed, int replications,
                                           int workers = 1) {
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  std::vector<metrics::RunReport> reports(static_cast<std::size_t>(replications));
  workers = std::max(1, std::min(workers, replications));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = w; r < replications; r += workers)
          reports[static_cast<std::size_t>(r)] = run_scenario(cfg, seed + static_cast<std::uint64_t>(r));
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  metrics::RunReport merged = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) merged.merge(reports[i]);
  merged.seed = seed;
  return merged;
}

}  // namespace lorafmar::sim
