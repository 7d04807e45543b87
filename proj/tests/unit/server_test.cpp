#include <gtest/gtest.h>

#include <set>

#include "lorafmar/server/network_server.hpp"

using namespace lorafmar;
using namespace lorafmar::server;

namespace {

std::vector<std::string> members(int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back("ED" + std::to_string(i + 1));
  return v;
}

std::vector<Frequency> g_channels(int c) {
  std::vector<Frequency> v;
  for (int i = 0; i < c; ++i) v.push_back(Frequency::from_mhz(867.1 + 0.2 * i));
  return v;
}

}  // namespace

TEST(Assignment, SingleDevicePerChannelUsesSingleSf) {
  const auto t = assign_resources(members(3), g_channels(5));
  for (const auto& [d, a] : t) EXPECT_EQ(a.sf, 7);
  EXPECT_TRUE(conflict_free(t));
}

TEST(Assignment, StackedChannelsUseSf8To10) {
  const auto t = assign_resources(members(6), g_channels(5));
  EXPECT_EQ(t.at("ED1").channel, t.at("ED6").channel);
  EXPECT_EQ(t.at("ED1").sf, 8);
  EXPECT_EQ(t.at("ED6").sf, 9);
  EXPECT_EQ(t.at("ED2").sf, 7);
  EXPECT_TRUE(conflict_free(t));
}

TEST(Assignment, PropertyUpToFifteenMembers) {
  for (int c = 1; c <= 5; ++c)
    for (int n = 0; n <= 3 * c; ++n) {
      const auto t = assign_resources(members(n), g_channels(c));
      ASSERT_EQ(t.size(), static_cast<std::size_t>(n));
      std::set<std::pair<std::int64_t, int>> seen;
      std::map<std::int64_t, int> per_channel;
      for (const auto& [d, a] : t) {
        EXPECT_TRUE(seen.emplace(a.channel.hz, a.sf).second);
        ++per_channel[a.channel.hz];
      }
      for (const auto& [d, a] : t) {
        EXPECT_LE(per_channel[a.channel.hz], 3);
        if (per_channel[a.channel.hz] > 1) {
          EXPECT_TRUE(a.sf >= 8 && a.sf <= 10);
        }
      }
      EXPECT_TRUE(conflict_free(t)) << n << " on " << c;
    }
}

TEST(Assignment, OverCapacityRejected) {
  EXPECT_THROW(assign_resources(members(16), g_channels(5)), std::invalid_argument);
  EXPECT_THROW(assign_resources(members(1), {}), std::invalid_argument);
  const std::vector<std::string> dup{"ED1", "ED1"};
  EXPECT_THROW(assign_resources(dup, g_channels(2)), std::invalid_argument);
}

TEST(Assignment, ConflictDetection) {
  AssignmentTable t{{"a", {Frequency::from_mhz(867.1), 9}}, {"b", {Frequency::from_mhz(867.1), 9}}};
  EXPECT_FALSE(conflict_free(t));
  t["b"].sf = 7;
  t["a"].sf = 8;
  EXPECT_FALSE(conflict_free(t));  // SF7 on a shared channel
}

TEST(NetworkServer, DeduplicatesAndSchedulesDcp) {
  ClusterConfig c{"alarm", {"ED8"}, "gw1", {Frequency::from_mhz(867.1)}, {9, {8, 9, 10}}, {}};
  NetworkServer srv({c}, {{"ED8", {"alarm"}}}, Frequency::from_mhz(869.525));
  ASSERT_TRUE(srv.assignment_of("ED8"));
  EXPECT_EQ(srv.assignment_of("ED8")->sf, 9);

  UplinkFrame f;
  f.device = "ED8";
  f.uplink_seq = 4;
  f.tx = phy::make_transmission(1, "ED8", phy::PacketKind::RP, Frequency::from_mhz(868.3), phy::lora_params(7),
                                SimTime::from_seconds(10), 37);
  f.gateway = "gw1";
  EXPECT_TRUE(srv.on_uplink(f));
  f.gateway = "gw2";
  EXPECT_FALSE(srv.on_uplink(f));
  EXPECT_EQ(srv.gateways_that_decoded("ED8", 4).size(), 2u);

  const auto dl = srv.schedule_dcp(f);
  ASSERT_TRUE(dl);
  EXPECT_EQ(dl->gateway, "gw1");
  EXPECT_EQ(dl->request.must_start_at, f.tx.end() + Duration::seconds(1));
  EXPECT_EQ(dl->request.channel, Frequency::from_mhz(868.3));
  EXPECT_EQ(dl->request.params.sf, 7);
  EXPECT_EQ(dl->request.rx2_at, f.tx.end() + Duration::seconds(2));
  EXPECT_EQ(dl->request.dcp.up_channel, Frequency::from_mhz(867.1));
  EXPECT_EQ(dl->request.dcp.up_sf, 9);
  EXPECT_EQ(dl->request.as_rx2().params.sf, 12);
}

TEST(NetworkServer, ForcedAssignmentsOverride) {
  ClusterConfig c{"pair", {"A", "B"}, "gw1", {}, {}, {}};
  c.forced_assignments["A"] = {Frequency::from_mhz(867.1), 7};
  c.forced_assignments["B"] = {Frequency::from_mhz(867.1), 7};
  NetworkServer srv({c}, {{"A", {"pair"}}, {"B", {"pair"}}}, Frequency::from_mhz(869.525));
  EXPECT_EQ(srv.assignment_of("B")->sf, 7);
  EXPECT_FALSE(srv.assignment_of("nobody"));
}
