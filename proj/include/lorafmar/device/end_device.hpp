#pragma once

#include <optional>
#include <string>
#include <utility>

#include "lorafmar/core/cause.hpp"
#include "lorafmar/core/random.hpp"
#include "lorafmar/core/time.hpp"
#include "lorafmar/phy/channel_plan.hpp"
#include "lorafmar/phy/duty_cycle.hpp"
#include "lorafmar/phy/radio.hpp"
#include "lorafmar/phy/transmission.hpp"

namespace lorafmar::device {

using phy::Frequency;
using phy::SubBandId;

// (channel, SF) a device must use for its next UP.
struct UpAssignment {
  Frequency channel;
  int sf = 7;

  bool operator==(const UpAssignment&) const = default;
};

// Control information carried by a DCP.
struct DcpPayload {
  std::string target_device;
  Frequency up_channel;
  int up_sf = 7;
};

enum class DcpVerdict { accepted, wrong_target, bad_sf, bad_channel };

inline std::string_view to_string(DcpVerdict v) {
  switch (v) {
    case DcpVerdict::accepted: return "accepted";
    case DcpVerdict::wrong_target: return "wrong-target";
    case DcpVerdict::bad_sf: return "bad-sf";
    case DcpVerdict::bad_channel: return "bad-channel";
  }
  return "?";
}

struct EndDeviceConfig {
  std::string name;
  std::string cluster;
  Duration rp_period = Duration::seconds(70);
  Duration clock_sigma = Duration::milliseconds(50);
  Duration interarrival_floor = Duration::seconds(1);
  bool sends_rp = true;
  std::optional<Duration> first_rp_offset;  // unset: uniform on [0, rp_period)
  SubBandId rp_subband = SubBandId::g1;
  SubBandId up_subband = SubBandId::g;
  int rp_sf = 7;
  int rp_phy_payload = phy::kDefaultRpPhyPayloadBytes;
  int up_app_payload = phy::kUrgentAppPayloadBytes;
  std::optional<UpAssignment> initial_assignment;
  Duration receive_delay1 = Duration::seconds(1);
  Duration receive_delay2 = Duration::seconds(2);
  double rx_power_dbm = -90.0;

  bool operator==(const EndDeviceConfig&) const = default;
};

struct RxWindows {
  SimTime rx1;
  Frequency rx1_channel;
  phy::RadioParams rx1_params;
  SimTime rx2;
  Frequency rx2_channel;
  phy::RadioParams rx2_params;
};

// EU868 RX2 default: DR0 = SF12/125 kHz.
inline constexpr int kRx2SpreadingFactor = 12;

inline RxWindows compute_rx_windows(const phy::Transmission& uplink, Duration delay1, Duration delay2,
                                    Frequency rx2_channel) {
  RxWindows w;
  w.rx1 = uplink.end() + delay1;
  w.rx1_channel = uplink.channel;
  w.rx1_params = uplink.params;  // RX1DROffset 0
  w.rx2 = uplink.end() + delay2;
  w.rx2_channel = rx2_channel;
  w.rx2_params = phy::lora_params(kRx2SpreadingFactor);
  return w;
}

// Class-A end device. Sends periodic RPs on its RP sub-band with a drifting
// clock and one-shot UPs on whatever (channel, SF) the last DCP assigned.
class EndDevice {
 public:
  explicit EndDevice(EndDeviceConfig cfg) : cfg_(std::move(cfg)), assignment_(cfg_.initial_assignment) {}

  const EndDeviceConfig& config() const { return cfg_; }
  const std::string& name() const { return cfg_.name; }
  const std::optional<UpAssignment>& assignment() const { return assignment_; }
  std::optional<SimTime> last_dcp_time() const { return last_dcp_time_; }
  SimTime radio_free_at() const { return radio_busy_until_; }
  const std::optional<RxWindows>& rx_windows() const { return windows_; }

  // now + max(floor, T + N(0, sigma)).
  SimTime next_rp_time(RandomStream& clock_rng, SimTime now) const {
    return now + sample_interarrival(clock_rng, cfg_.rp_period, cfg_.clock_sigma, cfg_.interarrival_floor);
  }

  struct RpAttempt {
    std::optional<phy::Transmission> tx;
    SimTime deferred_until;  // set when tx is empty
  };

  // Picks a uniformly random channel of the RP sub-band. Never falls back to
  // another sub-band: a blocked RP is deferred, not rerouted.
  RpAttempt transmit_rp(SimTime now, RandomStream& channel_rng, const phy::ChannelPlan& plan,
                        phy::DutyCycleLedger& ledger, std::uint64_t tx_id) {
    const auto& band = plan.band(cfg_.rp_subband);
    if (band.channels.empty()) throw std::logic_error("RP sub-band " + std::string(band.name()) + " has no channels");
    const auto params = phy::lora_params(cfg_.rp_sf);
    const Duration air = phy::airtime(params, cfg_.rp_phy_payload);
    if (now < radio_busy_until_) return {std::nullopt, radio_busy_until_};
    auto verdict = ledger.check(cfg_.name, band.id, now, air);
    if (!verdict.permitted) return {std::nullopt, verdict.blocked_until};

    const Frequency ch = band.channels[channel_rng.uniform_index(band.channels.size())];
    auto tx = phy::make_transmission(tx_id, cfg_.name, phy::PacketKind::RP, ch, params, now, cfg_.rp_phy_payload);
    tx.rx_power_dbm = cfg_.rx_power_dbm;
    ledger.record(cfg_.name, band.id, now, tx.airtime);
    after_uplink(tx, plan);
    return {std::move(tx), SimTime::zero()};
  }

  RxWindows open_rx_windows(const phy::Transmission& uplink, const phy::ChannelPlan& plan) const {
    return compute_rx_windows(uplink, cfg_.receive_delay1, cfg_.receive_delay2, plan.rx2_channel());
  }

  // True iff a downlink starting at `at` on (channel, params) lands exactly on
  // one of the windows opened by the most recent uplink, and the radio is
  // not transmitting.
  bool can_receive(SimTime at, Frequency channel, const phy::RadioParams& params) const {
    if (!windows_ || at < radio_busy_until_) return false;
    const auto& w = *windows_;
    if (at == w.rx1 && channel == w.rx1_channel && params.sf == w.rx1_params.sf) return true;
    if (at == w.rx2 && channel == w.rx2_channel && params.sf == w.rx2_params.sf) return true;
    return false;
  }

  // Last writer wins. Malformed assignments leave the current one in place.
  DcpVerdict on_dcp(const DcpPayload& dcp, const phy::ChannelPlan& plan, SimTime now) {
    if (dcp.target_device != cfg_.name) return DcpVerdict::wrong_target;
    if (dcp.up_sf < 7 || dcp.up_sf > 10) return DcpVerdict::bad_sf;
    if (!plan.is_channel_of(cfg_.up_subband, dcp.up_channel)) return DcpVerdict::bad_channel;
    assignment_ = UpAssignment{dcp.up_channel, dcp.up_sf};
    last_dcp_time_ = now;
    return DcpVerdict::accepted;
  }

  struct UpAttempt {
    std::optional<phy::Transmission> tx;
    Cause loss = Cause::decoded;  // duty_cycle or unassigned when tx is empty
  };

  // Exactly one attempt; urgent data never waits for the duty cycle. The
  // caller handles queueing behind an own uplink already on air.
  UpAttempt transmit_up(SimTime now, const phy::ChannelPlan& plan, phy::DutyCycleLedger& ledger,
                        std::uint64_t tx_id) {
    if (!assignment_) return {std::nullopt, Cause::unassigned};
    if (now < radio_busy_until_) throw std::logic_error("transmit_up while radio busy on " + cfg_.name);
    const auto& a = *assignment_;
    if (!plan.is_channel_of(cfg_.up_subband, a.channel) || a.sf < 7 || a.sf > 10)
      throw std::logic_error("assignment outside the UP sub-band or SF7-10 on " + cfg_.name);
    const auto params = phy::lora_params(a.sf);
    const int phy_len = cfg_.up_app_payload + phy::kMacOverheadBytes;
    const Duration air = phy::airtime(params, phy_len);
    if (!ledger.check(cfg_.name, cfg_.up_subband, now, air).permitted) return {std::nullopt, Cause::duty_cycle};

    auto tx = phy::make_transmission(tx_id, cfg_.name, phy::PacketKind::UP, a.channel, params, now, phy_len);
    tx.rx_power_dbm = cfg_.rx_power_dbm;
    ledger.record(cfg_.name, cfg_.up_subband, now, tx.airtime);
    after_uplink(tx, plan);
    return {std::move(tx), Cause::decoded};
  }

 private:
  void after_uplink(const phy::Transmission& tx, const phy::ChannelPlan& plan) {
    radio_busy_until_ = tx.end();
    windows_ = open_rx_windows(tx, plan);
  }

  EndDeviceConfig cfg_;
  std::optional<UpAssignment> assignment_;
  std::optional<SimTime> last_dcp_time_;
  std::optional<RxWindows> windows_;
  SimTime radio_busy_until_ = SimTime::zero();
};

}  // namespace lorafmar::device
