#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lorafmar/device/end_device.hpp"
#include "lorafmar/gateway/gateway.hpp"
#include "lorafmar/phy/channel_plan.hpp"

namespace lorafmar::server {

using device::UpAssignment;
using phy::Frequency;

// SF policy for filling a cluster. Channels holding a single device use
// `single_sf`; shared channels stack devices on `stack_sfs`, never SF7,
// because the SF7/SF8 pairing loses both packets more often than 0.1%.
struct AssignmentPolicy {
  int single_sf = 7;
  std::vector<int> stack_sfs = {8, 9, 10};

  bool operator==(const AssignmentPolicy&) const = default;
};

using AssignmentTable = std::map<std::string, UpAssignment>;

struct ClusterConfig {
  std::string name;
  std::vector<std::string> members;
  std::string dcp_gateway;
  std::vector<Frequency> up_channels;
  AssignmentPolicy policy;
  // Experimental override: fixed assignments that bypass assign_resources
  // and its conflict rules (used to force same-channel pairs).
  std::map<std::string, UpAssignment> forced_assignments;

  bool operator==(const ClusterConfig&) const = default;
};

inline std::size_t cluster_capacity(std::size_t channels, const AssignmentPolicy& policy) {
  return channels * std::max<std::size_t>(1, policy.stack_sfs.size());
}

// Channel-first fill: member i goes to channel i mod C in layer i / C. A
// channel that ends up with one device uses single_sf; a shared channel
// gives its k-th device stack_sfs[k]. Deterministic in member order.
inline AssignmentTable assign_resources(std::span<const std::string> members, std::span<const Frequency> up_channels,
                                        const AssignmentPolicy& policy = {}) {
  if (up_channels.empty()) {
    if (members.empty()) return {};
    throw std::invalid_argument("cluster has members but no UP channels");
  }
  const std::size_t capacity = cluster_capacity(up_channels.size(), policy);
  if (members.size() > capacity)
    throw std::invalid_argument("cluster of " + std::to_string(members.size()) + " devices exceeds capacity " +
                                std::to_string(capacity) + " (" + std::to_string(up_channels.size()) +
                                " channels x " + std::to_string(policy.stack_sfs.size()) +
                                " SFs); split the cluster or add UP channels");
  const std::size_t c = up_channels.size();
  std::vector<std::size_t> occupancy(c, 0);
  for (std::size_t i = 0; i < members.size(); ++i) ++occupancy[i % c];

  AssignmentTable table;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const std::size_t ch = i % c, layer = i / c;
    const int sf = occupancy[ch] == 1 ? policy.single_sf : policy.stack_sfs[layer];
    if (!table.emplace(members[i], UpAssignment{up_channels[ch], sf}).second)
      throw std::invalid_argument("duplicate cluster member '" + members[i] + "'");
  }
  return table;
}

// True iff no two entries share (channel, SF), no channel holds more than
// three devices, and shared channels only use SF8-10.
inline bool conflict_free(const AssignmentTable& table) {
  std::set<std::pair<std::int64_t, int>> seen;
  std::map<std::int64_t, std::vector<int>> per_channel;
  for (const auto& [dev, a] : table) {
    if (!seen.emplace(a.channel.hz, a.sf).second) return false;
    per_channel[a.channel.hz].push_back(a.sf);
  }
  for (const auto& [ch, sfs] : per_channel) {
    if (sfs.size() > 3) return false;
    if (sfs.size() > 1)
      for (int sf : sfs)
        if (sf < 8 || sf > 10) return false;
  }
  return true;
}

struct UplinkFrame {
  std::string device;
  std::uint64_t uplink_seq = 0;  // dedup key together with device
  phy::Transmission tx;
  std::string gateway;
  SimTime received_at;
};

// Per-device radio timing the server needs to hit Class-A windows.
struct DeviceProfile {
  std::string cluster;
  Duration receive_delay1 = Duration::seconds(1);
  Duration receive_delay2 = Duration::seconds(2);
};

// Network server: deduplicates multi-gateway receptions and answers every
// decoded RP with a DCP carrying the sender's current UP assignment.
class NetworkServer {
 public:
  NetworkServer(std::vector<ClusterConfig> clusters, std::map<std::string, DeviceProfile> devices,
                Frequency rx2_channel, int dcp_phy_payload = phy::kDefaultDcpPhyPayloadBytes)
      : clusters_(std::move(clusters)), devices_(std::move(devices)), rx2_channel_(rx2_channel),
        dcp_phy_payload_(dcp_phy_payload) {
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
      const auto& c = clusters_[i];
      std::vector<std::string> auto_members;
      for (const auto& m : c.members)
        if (!c.forced_assignments.contains(m)) auto_members.push_back(m);
      auto table = assign_resources(auto_members, c.up_channels, c.policy);
      for (const auto& [dev, a] : c.forced_assignments) table[dev] = a;
      tables_[c.name] = std::move(table);
      for (const auto& m : c.members) cluster_of_[m] = i;
    }
  }

  const std::map<std::string, AssignmentTable>& assignments() const { return tables_; }

  std::optional<UpAssignment> assignment_of(const std::string& device) const {
    auto it = cluster_of_.find(device);
    if (it == cluster_of_.end()) return std::nullopt;
    const auto& table = tables_.at(clusters_[it->second].name);
    auto a = table.find(device);
    if (a == table.end()) return std::nullopt;
    return a->second;
  }

  // Returns true for the first copy of an uplink, false for duplicates.
  bool on_uplink(const UplinkFrame& frame) {
    const bool first = delivered_.emplace(frame.device, frame.uplink_seq).second;
    receptions_[{frame.device, frame.uplink_seq}].push_back(frame.gateway);
    return first;
  }

  const std::vector<std::string>& gateways_that_decoded(const std::string& device, std::uint64_t seq) const {
    static const std::vector<std::string> none;
    auto it = receptions_.find({device, seq});
    return it == receptions_.end() ? none : it->second;
  }

  // Drops bookkeeping for an uplink once it can no longer be duplicated.
  void forget(const std::string& device, std::uint64_t seq) { receptions_.erase({device, seq}); }

  struct RoutedDownlink {
    std::string gateway;
    gateway::DownlinkRequest request;
  };

  // DCP aimed at the RX1 instant of the RP's sender, routed through the
  // cluster's DCP gateway. No assignment, no DCP.
  std::optional<RoutedDownlink> schedule_dcp(const UplinkFrame& rp) const {
    if (rp.tx.kind != phy::PacketKind::RP) throw std::logic_error("schedule_dcp called for a non-RP uplink");
    auto ci = cluster_of_.find(rp.device);
    if (ci == cluster_of_.end()) return std::nullopt;
    auto assignment = assignment_of(rp.device);
    if (!assignment) return std::nullopt;
    const auto& profile = devices_.at(rp.device);
    const auto windows = device::compute_rx_windows(rp.tx, profile.receive_delay1, profile.receive_delay2, rx2_channel_);

    gateway::DownlinkRequest req;
    req.dcp = device::DcpPayload{rp.device, assignment->channel, assignment->sf};
    req.must_start_at = windows.rx1;
    req.channel = windows.rx1_channel;
    req.params = windows.rx1_params;
    req.phy_payload_len = dcp_phy_payload_;
    req.rx2_at = windows.rx2;
    req.rx2_channel = windows.rx2_channel;
    req.rx2_params = windows.rx2_params;
    return RoutedDownlink{clusters_[ci->second].dcp_gateway, std::move(req)};
  }

 private:
  std::vector<ClusterConfig> clusters_;
  std::map<std::string, DeviceProfile> devices_;
  Frequency rx2_channel_;
  int dcp_phy_payload_;
  std::map<std::string, AssignmentTable> tables_;
  std::map<std::string, std::size_t> cluster_of_;
  std::set<std::pair<std::string, std::uint64_t>> delivered_;
  std::map<std::pair<std::string, std::uint64_t>, std::vector<std::string>> receptions_;
};

}  // namespace lorafmar::server
