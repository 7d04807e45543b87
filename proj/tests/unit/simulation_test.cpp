#include <gtest/gtest.h>

#include "lorafmar/sim/scenario_io.hpp"
#include "lorafmar/sim/simulation.hpp"
#include "lorafmar/sim/validation.hpp"

using namespace lorafmar;
using namespace lorafmar::sim;

namespace {

const std::string kDir = LORAFMAR_SCENARIO_DIR;

ScenarioConfig shortened(const std::string& file, std::uint64_t alarms) {
  auto cfg = load_scenario(kDir + "/" + file);
  cfg.stop.alarm_events = alarms;
  return cfg;
}

}  // namespace

TEST(Simulation, ConservationAndDeterminism) {
  const auto cfg = shortened("test2_dl_priority.yaml", 400);
  const auto a = run_scenario(cfg, 5);
  const auto b = run_scenario(cfg, 5);
  EXPECT_TRUE(a.conserved());
  EXPECT_EQ(a.up.generated, 400u);
  EXPECT_EQ(metrics::to_json(a).dump(), metrics::to_json(b).dump());
  const auto c = run_scenario(cfg, 6);
  EXPECT_NE(metrics::to_json(a).dump(), metrics::to_json(c).dump());
}

TEST(Simulation, HalfDuplexInvariantHolds) {
  const auto cfg = shortened("test2_dl_priority.yaml", 100);
  bool ok = true;
  TraceHooks hooks;
  hooks.on_event = [&](SimTime now, const std::vector<gateway::Gateway>& gws) {
    for (const auto& g : gws) ok = ok && g.half_duplex_holds(now);
  };
  run_scenario(cfg, 1, hooks);
  EXPECT_TRUE(ok);
}

TEST(Simulation, DownlinksRespectGatewayDutyCycle) {
  const auto cfg = shortened("test2_dl_priority.yaml", 100);
  Simulation sim(cfg, 3);
  const auto r = sim.run();
  const auto& ledger = sim.gateway_ledger();
  const Duration w = Duration::seconds(3600);
  for (auto band : phy::kAllSubBands)
    for (SimTime t = SimTime::zero() + w; t < sim.now(); t = t + Duration::seconds(600))
      EXPECT_LE(ledger.busy_time("gw1", band, t - w, t).to_seconds(), 3600 * phy::duty_cycle_limit(band) + 1e-6);
  EXPECT_GT(r.dcp.sent_rx1, 0u);
}

TEST(Simulation, DeliveredUpsMeetLatencyBudget) {
  const auto r = run_scenario(shortened("test3_dual_gw.yaml", 300), 2);
  EXPECT_EQ(r.latency_over_budget, 0u);
  for (auto l : r.up_latencies) EXPECT_LE(l, phy::kUrgentLatencyBudget + Duration::milliseconds(20));
}

TEST(Simulation, DcpsAssignUpResources) {
  auto cfg = shortened("test2_dl_priority.yaml", 50);
  for (auto& d : cfg.devices) d.radio.initial_assignment.reset();
  int applied = 0;
  TraceHooks hooks;
  hooks.on_dcp_applied = [&](const std::string& dev, const device::DcpPayload& p, SimTime) {
    if (dev == "ED8") {
      EXPECT_EQ(p.up_sf, 9);
      EXPECT_EQ(p.up_channel, phy::Frequency::from_mhz(867.1));
      ++applied;
    }
  };
  Simulation sim(cfg, 1, hooks);
  const auto r = sim.run();
  EXPECT_GT(applied, 0);
  EXPECT_TRUE(sim.devices()[7].assignment().has_value());
  // Alarms before the first DCP find ED8 without an assignment.
  EXPECT_TRUE(r.conserved());
}

TEST(Simulation, DurationStop) {
  auto cfg = load_scenario(kDir + "/test2_dl_priority.yaml");
  cfg.stop.alarm_events.reset();
  cfg.stop.duration = Duration::seconds(1000);
  const auto r = run_scenario(cfg, 1);
  EXPECT_DOUBLE_EQ(r.sim_time_s, 1000.0);
  EXPECT_TRUE(r.conserved());
}

TEST(Simulation, ReplicationsFoldInSeedOrder) {
  const auto cfg = shortened("test2_dl_priority.yaml", 200);
  const auto merged = run_replications(cfg, 10, 3, 2);
  auto manual = run_scenario(cfg, 10);
  manual.merge(run_scenario(cfg, 11));
  manual.merge(run_scenario(cfg, 12));
  manual.seed = 10;
  EXPECT_EQ(metrics::to_json(merged).dump(), metrics::to_json(manual).dump());
  EXPECT_EQ(merged.replications, 3);
}

TEST(Simulation, DualGatewayLossesAreNotPreemption) {
  const auto r = run_scenario(shortened("test3_dual_gw.yaml", 2000), 4);
  EXPECT_EQ(r.up.losses.count(Cause::gw_preempted) ? r.up.losses.at(Cause::gw_preempted) : 0u, 0u);
  EXPECT_EQ(r.gateways.at("gw2").downlinks_sent, 0u);
}

TEST(Validation, DerivesTest2Setting) {
  const auto s = derive_model_setting(load_scenario(kDir + "/test2_dl_priority.yaml"));
  EXPECT_EQ(s.up_device, "ED8");
  EXPECT_EQ(s.dcp_airtimes_s.size(), 8u);
  EXPECT_DOUBLE_EQ(s.up_airtime_s, 0.267264);
  EXPECT_DOUBLE_EQ(s.dcp_airtimes_s[0], 0.082176);
  EXPECT_DOUBLE_EQ(s.period_s, 70.0);
  EXPECT_FALSE(s.dual_gateway);
  EXPECT_TRUE(derive_model_setting(load_scenario(kDir + "/test3_dual_gw.yaml")).dual_gateway);
}

TEST(Validation, RejectsScenariosOutsideTheModel) {
  EXPECT_THROW(derive_model_setting(load_scenario(kDir + "/test1_sf_pairs.yaml")), ValidationError);
  ValidationOptions opt;
  EXPECT_THROW(validate_against_model(shortened("test3_dual_gw.yaml", 10), 1, opt), ValidationError);
  opt.dual_gateway = true;
  EXPECT_THROW(validate_against_model(shortened("test2_dl_priority.yaml", 10), 1, opt), ValidationError);
}
