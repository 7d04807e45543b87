#include <gtest/gtest.h>

#include <filesystem>

#include "lorafmar/sim/scenario_io.hpp"

using namespace lorafmar;
using namespace lorafmar::sim;

namespace {

const std::string kDir = LORAFMAR_SCENARIO_DIR;

const char* kMinimal = R"(name: minimal
stop: {duration: 1 h}
gateways:
  - id: gw1
devices:
  - id: ED1
    cluster: room
clusters:
  - id: room
    members: [ED1]
    dcp_gateway: gw1
    up_channels: [867.1 MHz]
)";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST(Scenario, MinimalDefaults) {
  const auto cfg = parse_scenario(kMinimal);
  EXPECT_NO_THROW(cfg.validate());
  ASSERT_EQ(cfg.devices.size(), 1u);
  const auto& d = cfg.devices[0].radio;
  EXPECT_EQ(d.rp_period, Duration::seconds(70));
  EXPECT_EQ(d.clock_sigma, Duration::milliseconds(50));
  EXPECT_EQ(cfg.gateways[0].backhaul_delay, Duration::milliseconds(20));
  EXPECT_EQ(cfg.stop.duration, Duration::seconds(3600));
}

TEST(Scenario, ShippedScenariosParseValidateAndRoundTrip) {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kDir)) {
    if (entry.path().extension() != ".yaml") continue;
    ++n;
    const auto cfg = load_scenario(entry.path().string());
    EXPECT_NO_THROW(cfg.validate()) << entry.path();
    const auto text = serialize_scenario(cfg);
    const auto again = parse_scenario(text, "roundtrip");
    EXPECT_TRUE(cfg == again) << entry.path() << "\n" << text;
    EXPECT_EQ(serialize_scenario(again), text);
    EXPECT_EQ(scenario_digest(cfg), scenario_digest(again));
  }
  EXPECT_GE(n, 3);
}

TEST(Scenario, Test2Content) {
  const auto cfg = load_scenario(kDir + "/test2_dl_priority.yaml");
  EXPECT_EQ(cfg.devices.size(), 8u);
  EXPECT_EQ(cfg.gateways.size(), 1u);
  EXPECT_EQ(*cfg.stop.alarm_events, 20000u);
  ASSERT_EQ(cfg.events.size(), 1u);
  EXPECT_EQ(cfg.events[0].periodic->min_interval, Duration::seconds(120));
  EXPECT_EQ(cfg.events[0].periodic->max_interval, Duration::seconds(130));
  EXPECT_EQ(cfg.find_cluster("alarm")->policy.single_sf, 9);
}

TEST(Scenario, BareNumbersRejected) {
  try {
    parse_scenario(with("duration: 1 h", "duration: 3600"), "f.yaml");
    FAIL();
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("f.yaml:2:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("stop.duration"), std::string::npos) << msg;
    EXPECT_NE(msg.find("missing time unit"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_scenario(with("[867.1 MHz]", "[867.1]")), ParseError);
  EXPECT_THROW(parse_scenario(with("[867.1 MHz]", "[867.1 furlongs]")), ParseError);
}

TEST(Scenario, UnknownFieldsRejected) {
  EXPECT_THROW(parse_scenario(with("  - id: gw1\n", "  - id: gw1\n    colour: red\n")), ParseError);
  EXPECT_THROW(parse_scenario(std::string(kMinimal) + "extra: 1\n"), ParseError);
  EXPECT_THROW(parse_scenario("name: [unclosed\n"), ParseError);
}

TEST(Scenario, UnitsConvert) {
  const auto cfg = parse_scenario(with("    cluster: room\n", "    cluster: room\n    rp_period: 2 min\n    clock_sigma: 500 us\n"));
  EXPECT_EQ(cfg.devices[0].radio.rp_period, Duration::seconds(120));
  EXPECT_EQ(cfg.devices[0].radio.clock_sigma, Duration::microseconds(500));
  const auto khz = parse_scenario(with("[867.1 MHz]", "[867100 kHz]"));
  EXPECT_EQ(khz.clusters[0].up_channels[0], phy::Frequency::from_mhz(867.1));
}

TEST(Scenario, ValidationNamesOffendingIds) {
  auto expect_validation = [](const std::string& text, const std::string& needle) {
    const auto cfg = parse_scenario(text);
    try {
      cfg.validate();
      ADD_FAILURE() << "no error for " << needle;
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_validation(with("members: [ED1]", "members: [ED1, ED9]"), "ED9");
  expect_validation(with("dcp_gateway: gw1", "dcp_gateway: gw7"), "gw7");
  expect_validation(with("[867.1 MHz]", "[868.1 MHz]"), "up_channels");
  expect_validation(with("    cluster: room\n", "    cluster: room\n    rp_subband: g\n"), "sub-bands must differ");
  expect_validation(with("  - id: gw1\n", "  - id: gw1\n    backhaul: 1 s\n"), "backhaul");
  expect_validation(with("  - id: gw1\n", "  - id: gw1\n    role: rx-only\n"), "rx-only");
  expect_validation(with("stop: {duration: 1 h}", "stop: {drain: 1 s}"), "stop");
}

TEST(Scenario, CapacityChecked) {
  std::string text = "name: big\nstop: {duration: 1 h}\ngateways: [{id: gw1}]\ndevices:\n";
  std::string members;
  for (int i = 1; i <= 16; ++i) {
    text += "  - {id: D" + std::to_string(i) + ", cluster: big}\n";
    members += (i > 1 ? ", D" : "D") + std::to_string(i);
  }
  text += "clusters:\n  - id: big\n    members: [" + members +
          "]\n    dcp_gateway: gw1\n    up_channels: [867.1 MHz, 867.3 MHz, 867.5 MHz, 867.7 MHz, 867.9 MHz]\n";
  EXPECT_THROW(parse_scenario(text).validate(), ValidationError);
}

TEST(Scenario, DigestTracksContent) {
  const auto a = parse_scenario(kMinimal);
  const auto b = parse_scenario(with("name: minimal", "name: other"));
  EXPECT_NE(scenario_digest(a), scenario_digest(b));
  EXPECT_EQ(scenario_digest(a).size(), 16u);
}
