#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lorafmar/core/error.hpp"
#include "lorafmar/device/end_device.hpp"
#include "lorafmar/gateway/gateway.hpp"
#include "lorafmar/phy/capture.hpp"
#include "lorafmar/phy/channel_plan.hpp"
#include "lorafmar/phy/duty_cycle.hpp"
#include "lorafmar/sensor/gas_sensor.hpp"
#include "lorafmar/server/network_server.hpp"

namespace lorafmar::sim {

struct StopCondition {
  std::optional<std::uint64_t> alarm_events;  // stop after this many alarms
  std::optional<Duration> duration;
  Duration drain = Duration::seconds(5);  // settle in-flight packets after the last alarm

  bool operator==(const StopCondition&) const = default;
};

struct DutyCycleSettings {
  phy::DutyCyclePolicy device_policy = phy::DutyCyclePolicy::off_period;
  phy::DutyCyclePolicy gateway_policy = phy::DutyCyclePolicy::sliding_window;
  Duration window = Duration::seconds(3600);

  bool operator==(const DutyCycleSettings&) const = default;
};

struct CaptureSettings {
  phy::CaptureMode mode = phy::CaptureMode::empirical;
  double co_sf_capture_margin_db = 6.0;
  double inter_sf_isolation_db = 16.0;
  std::vector<phy::PairLossObservation> pairs = phy::measured_pair_losses();
  double unlisted_same_sf_survival = 0.0;
  double unlisted_cross_sf_survival = 1.0;

  bool operator==(const CaptureSettings&) const = default;

  phy::CaptureModel build() const {
    phy::CaptureModel m;
    m.mode = mode;
    m.co_sf_capture_margin_db = co_sf_capture_margin_db;
    m.inter_sf_isolation_db = inter_sf_isolation_db;
    m.unlisted_same_sf_survival = unlisted_same_sf_survival;
    m.unlisted_cross_sf_survival = unlisted_cross_sf_survival;
    for (const auto& o : pairs) m.add_observation(o);
    m.validate();
    return m;
  }
};

struct DeviceEntry {
  device::EndDeviceConfig radio;
  std::vector<std::string> gateways;  // empty: heard by every gateway

  bool operator==(const DeviceEntry&) const = default;
};

struct EventEntry {
  // Exactly one of the two is used.
  std::optional<sensor::EventSource::Periodic> periodic;
  std::vector<sensor::GasEvent> script;

  bool operator==(const EventEntry&) const = default;

  sensor::EventSource source() const {
    sensor::EventSource s;
    if (periodic)
      s.periodic = *periodic;
    else
      s.scripted = sensor::EventSource::Scripted{script};
    return s;
  }
};

struct OutputPaths {
  std::optional<std::string> json;
  std::optional<std::string> csv;

  bool operator==(const OutputPaths&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string description;
  std::uint64_t seed = 1;
  StopCondition stop;
  std::map<phy::SubBandId, std::vector<phy::Frequency>> channel_overrides;
  DutyCycleSettings duty_cycle;
  CaptureSettings capture;
  int dcp_phy_payload = phy::kDefaultDcpPhyPayloadBytes;
  std::vector<DeviceEntry> devices;
  std::vector<gateway::GatewayConfig> gateways;
  std::vector<server::ClusterConfig> clusters;
  sensor::SensorProfile sensor;
  std::vector<EventEntry> events;
  OutputPaths outputs;

  bool operator==(const ScenarioConfig&) const = default;

  phy::ChannelPlan channel_plan() const {
    auto plan = phy::ChannelPlan::eu868();
    for (const auto& [band, chans] : channel_overrides) plan.set_channels(band, chans);
    return plan;
  }

  const DeviceEntry* find_device(const std::string& n) const {
    for (const auto& d : devices)
      if (d.radio.name == n) return &d;
    return nullptr;
  }
  const gateway::GatewayConfig* find_gateway(const std::string& n) const {
    for (const auto& g : gateways)
      if (g.name == n) return &g;
    return nullptr;
  }
  const server::ClusterConfig* find_cluster(const std::string& n) const {
    for (const auto& c : clusters)
      if (c.name == n) return &c;
    return nullptr;
  }

  // Referential integrity and radio constraints. Throws ValidationError
  // naming the offending id or field.
  void validate() const {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };
    phy::ChannelPlan plan;
    try {
      plan = channel_plan();
    } catch (const std::invalid_argument& e) {
      fail(std::string("channels: ") + e.what());
    }
    if (!stop.alarm_events && !stop.duration) fail("stop: need alarm_events or duration");
    if (stop.alarm_events && !stop.duration && events.empty()) fail("stop: alarm_events set but no event sources");
    if (dcp_phy_payload < 0) fail("dcp_phy_payload: negative");
    try {
      capture.build();
      sensor.validate();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }

    std::set<std::string> gw_names;
    for (const auto& g : gateways) {
      if (!gw_names.insert(g.name).second) fail("gateways: duplicate id '" + g.name + "'");
      if (g.demod_paths < 1) fail("gateways." + g.name + ".demod_paths: must be >= 1");
      if (g.backhaul_delay < Duration::zero()) fail("gateways." + g.name + ".backhaul: negative");
    }
    if (gateways.empty()) fail("gateways: at least one gateway required");

    std::set<std::string> dev_names;
    for (const auto& d : devices) {
      const auto& r = d.radio;
      if (!dev_names.insert(r.name).second) fail("devices: duplicate id '" + r.name + "'");
      const std::string where = "devices." + r.name;
      if (!find_cluster(r.cluster)) fail(where + ".cluster: unknown cluster '" + r.cluster + "'");
      if (r.rp_period <= Duration::zero()) fail(where + ".rp_period: must be positive");
      if (r.clock_sigma < Duration::zero()) fail(where + ".clock_sigma: negative");
      if (r.rp_sf < 7 || r.rp_sf > 12) fail(where + ".rp_sf: outside 7..12");
      if (r.rp_subband == r.up_subband) fail(where + ": RP and UP sub-bands must differ");
      if (plan.band(r.rp_subband).channels.empty()) fail(where + ".rp_subband: sub-band has no channels");
      if (r.receive_delay2 <= r.receive_delay1) fail(where + ": receive_delay2 must exceed receive_delay1");
      if (r.initial_assignment) {
        const auto& a = *r.initial_assignment;
        if (!plan.is_channel_of(r.up_subband, a.channel))
          fail(where + ".initial_assignment: channel not in UP sub-band " + std::string(to_string(r.up_subband)));
        if (a.sf < 7 || a.sf > 10) fail(where + ".initial_assignment: SF outside 7..10");
      }
      for (const auto& g : d.gateways)
        if (!gw_names.contains(g)) fail(where + ".gateways: unknown gateway '" + g + "'");
      for (const auto& g : gateways)
        if (g.backhaul_delay >= r.receive_delay1)
          fail("gateways." + g.name + ".backhaul: must be shorter than " + r.name + "'s receive_delay1");
    }

    std::set<std::string> clustered;
    for (const auto& c : clusters) {
      const std::string where = "clusters." + c.name;
      const auto* gw = find_gateway(c.dcp_gateway);
      if (!gw) fail(where + ".dcp_gateway: unknown gateway '" + c.dcp_gateway + "'");
      if (gw->role != gateway::Role::full) fail(where + ".dcp_gateway: '" + c.dcp_gateway + "' is rx-only");
      for (const auto& m : c.members) {
        const auto* d = find_device(m);
        if (!d) fail(where + ".members: unknown device '" + m + "'");
        if (d->radio.cluster != c.name) fail(where + ".members: device '" + m + "' declares cluster '" + d->radio.cluster + "'");
        if (!clustered.insert(m).second) fail(where + ".members: device '" + m + "' is in two clusters");
      }
      for (const auto& ch : c.up_channels)
        for (const auto& m : c.members)
          if (!plan.is_channel_of(find_device(m)->radio.up_subband, ch))
            fail(where + ".up_channels: " + std::to_string(ch.mhz()) + " MHz is not in the UP sub-band of '" + m + "'");
      for (const auto& [m, a] : c.forced_assignments) {
        if (std::find(c.members.begin(), c.members.end(), m) == c.members.end())
          fail(where + ".forced_assignments: '" + m + "' is not a member");
        if (a.sf < 7 || a.sf > 10) fail(where + ".forced_assignments." + m + ": SF outside 7..10");
        if (!plan.is_channel_of(find_device(m)->radio.up_subband, a.channel))
          fail(where + ".forced_assignments." + m + ": channel not in the UP sub-band");
      }
      std::vector<std::string> auto_members;
      for (const auto& m : c.members)
        if (!c.forced_assignments.contains(m)) auto_members.push_back(m);
      try {
        auto table = server::assign_resources(auto_members, c.up_channels, c.policy);
        if (!server::conflict_free(table)) fail(where + ": policy produces conflicting assignments");
      } catch (const std::invalid_argument& e) {
        fail(where + ": " + e.what());
      }
    }
    for (const auto& d : devices)
      if (!clustered.contains(d.radio.name)) fail("devices." + d.radio.name + ": not a member of any cluster");

    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      const std::string where = "events[" + std::to_string(i) + "]";
      if (e.periodic) {
        if (!find_cluster(e.periodic->scope)) fail(where + ".scope: unknown cluster '" + e.periodic->scope + "'");
        if (e.periodic->min_interval <= Duration::zero() || e.periodic->max_interval < e.periodic->min_interval)
          fail(where + ": need 0 < min_interval <= max_interval");
        if (!e.script.empty()) fail(where + ": periodic and script are exclusive");
      } else {
        SimTime prev = SimTime::zero();
        for (const auto& g : e.script) {
          if (!find_cluster(g.scope)) fail(where + ".scope: unknown cluster '" + g.scope + "'");
          if (g.at < prev) fail(where + ": script times must be ascending");
          if (g.level < 0) fail(where + ": negative gas level");
          prev = g.at;
        }
      }
    }
  }
};

}  // namespace lorafmar::sim
