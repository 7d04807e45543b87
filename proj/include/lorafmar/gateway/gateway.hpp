#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorafmar/core/cause.hpp"
#include "lorafmar/core/random.hpp"
#include "lorafmar/device/end_device.hpp"
#include "lorafmar/phy/capture.hpp"
#include "lorafmar/phy/duty_cycle.hpp"

namespace lorafmar::gateway {

enum class Role { full, rx_only };

inline std::string_view to_string(Role r) { return r == Role::full ? "full" : "rx-only"; }

inline Role role_from_string(std::string_view s) {
  if (s == "full") return Role::full;
  if (s == "rx-only") return Role::rx_only;
  throw std::invalid_argument("unknown gateway role '" + std::string(s) + "'");
}

// What a downlink interrupts. `radio` is the commercial behaviour: any
// transmission silences the whole receiver.
enum class PreemptionScope { radio, channel, none };

inline std::string_view to_string(PreemptionScope p) {
  switch (p) {
    case PreemptionScope::radio: return "radio";
    case PreemptionScope::channel: return "channel";
    case PreemptionScope::none: return "none";
  }
  return "?";
}

inline PreemptionScope preemption_scope_from_string(std::string_view s) {
  if (s == "radio") return PreemptionScope::radio;
  if (s == "channel") return PreemptionScope::channel;
  if (s == "none") return PreemptionScope::none;
  throw std::invalid_argument("unknown preemption scope '" + std::string(s) + "'");
}

struct GatewayConfig {
  std::string name;
  Role role = Role::full;
  int demod_paths = 10;
  Duration backhaul_delay = Duration::milliseconds(20);
  PreemptionScope preemption = PreemptionScope::radio;

  bool operator==(const GatewayConfig&) const = default;
};

struct DownlinkRequest {
  device::DcpPayload dcp;
  SimTime must_start_at;
  phy::Frequency channel;
  phy::RadioParams params;
  int phy_payload_len = phy::kDefaultDcpPhyPayloadBytes;
  bool rx2 = false;
  // RX2 coordinates, used when RX1 is refused for duty cycle.
  SimTime rx2_at;
  phy::Frequency rx2_channel;
  phy::RadioParams rx2_params;

  DownlinkRequest as_rx2() const {
    DownlinkRequest r = *this;
    r.rx2 = true;
    r.must_start_at = rx2_at;
    r.channel = rx2_channel;
    r.params = rx2_params;
    return r;
  }
};

struct UplinkStart {
  bool accepted = true;
  Cause cause = Cause::decoded;  // drop cause when !accepted
};

struct DownlinkResult {
  bool sent = false;
  Cause skip_cause = Cause::decoded;
  std::optional<phy::Transmission> tx;
  std::vector<std::uint64_t> preempted;  // uplink ids aborted by this downlink
};

// Half-duplex gateway: up to demod_paths parallel receptions; a downlink
// aborts receptions in progress and blocks new ones until it ends.
class Gateway {
 public:
  explicit Gateway(GatewayConfig cfg) : cfg_(std::move(cfg)) {}

  const GatewayConfig& config() const { return cfg_; }
  const std::string& name() const { return cfg_.name; }
  std::optional<SimTime> tx_busy_until() const { return tx_busy_until_; }
  std::size_t active_receptions() const { return active_.size(); }

  bool transmitting(SimTime now) const { return tx_busy_until_ && now < *tx_busy_until_; }

  UplinkStart on_uplink_start(const phy::Transmission& tx, SimTime now) {
    prune(now);
    heard_.push_back(tx);
    if (transmitting(now) && blocks(tx.channel)) return drop(tx.id, Cause::tx_busy);
    if (static_cast<int>(active_.size()) >= cfg_.demod_paths) return drop(tx.id, Cause::no_demod_path);
    active_.emplace(tx.id, tx);
    return {};
  }

  DownlinkResult start_downlink(const DownlinkRequest& req, SimTime now, phy::DutyCycleLedger& ledger,
                                const phy::ChannelPlan& plan, std::uint64_t tx_id) {
    if (now != req.must_start_at) throw std::logic_error("downlink started off its receive window");
    DownlinkResult r;
    if (cfg_.role == Role::rx_only) {
      r.skip_cause = Cause::rx_only;
      return r;
    }
    if (transmitting(now)) {
      r.skip_cause = Cause::tx_busy;
      return r;
    }
    auto tx = phy::make_transmission(tx_id, cfg_.name, phy::PacketKind::DCP, req.channel, req.params, now,
                                     req.phy_payload_len);
    const auto band = plan.subband_of(req.channel).id;
    if (!ledger.check(cfg_.name, band, now, tx.airtime).permitted) {
      r.skip_cause = Cause::duty_cycle;
      return r;
    }
    ledger.record(cfg_.name, band, now, tx.airtime);
    tx_busy_until_ = tx.end();
    tx_channel_ = tx.channel;

    for (auto it = active_.begin(); it != active_.end();) {
      if (blocks(it->second.channel)) {
        r.preempted.push_back(it->first);
        settled_[it->first] = Cause::gw_preempted;
        it = active_.erase(it);
      } else {
        ++it;
      }
    }
    r.sent = true;
    r.tx = std::move(tx);
    return r;
  }

  // Final verdict for an uplink this gateway heard start.
  Cause on_uplink_end(const phy::Transmission& tx, SimTime now, const phy::CaptureModel& capture,
                      RandomStream& rng) {
    if (auto it = settled_.find(tx.id); it != settled_.end()) {
      const Cause c = it->second;
      settled_.erase(it);
      return c;
    }
    if (active_.erase(tx.id) == 0) throw std::logic_error("uplink end without start at " + cfg_.name);
    std::vector<const phy::Transmission*> interferers;
    for (const auto& h : heard_)
      if (h.id != tx.id && h.channel == tx.channel && h.overlaps(tx)) interferers.push_back(&h);
    if (now < tx.end()) throw std::logic_error("uplink end reported before it finished on air");
    return phy::survives(tx, interferers, capture, rng, &pair_draws_) ? Cause::decoded : Cause::collision;
  }

  // Half-duplex invariant check for audits.
  bool half_duplex_holds(SimTime now) const {
    if (cfg_.preemption != PreemptionScope::radio) return true;
    return !(transmitting(now) && !active_.empty());
  }

 private:
  bool blocks(phy::Frequency uplink_channel) const {
    switch (cfg_.preemption) {
      case PreemptionScope::radio: return true;
      case PreemptionScope::channel: return uplink_channel == tx_channel_;
      case PreemptionScope::none: return false;
    }
    return true;
  }

  UplinkStart drop(std::uint64_t id, Cause c) {
    settled_[id] = c;
    return {false, c};
  }

  // Keeps only uplinks that might still overlap something in flight.
  void prune(SimTime now) {
    const Duration horizon = Duration::seconds(10);
    while (!heard_.empty() && heard_.front().end() + horizon < now) heard_.pop_front();
    if (++prune_calls_ % 1024 == 0) pair_draws_.prune(now);
  }

  GatewayConfig cfg_;
  std::map<std::uint64_t, phy::Transmission> active_;
  std::map<std::uint64_t, Cause> settled_;
  std::deque<phy::Transmission> heard_;
  phy::PairDraws pair_draws_;
  std::uint64_t prune_calls_ = 0;
  std::optional<SimTime> tx_busy_until_;
  phy::Frequency tx_channel_;
};

}  // namespace lorafmar::gateway
