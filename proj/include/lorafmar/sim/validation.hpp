#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lorafmar/analytic/plr_model.hpp"
#include "lorafmar/core/error.hpp"
#include "lorafmar/metrics/stats.hpp"
#include "lorafmar/sim/scenario.hpp"
#include "lorafmar/sim/simulation.hpp"

namespace lorafmar::sim {

// Analytic inputs read off a scenario: one UP sender, DCP traffic from
// every RP sender whose DCP gateway hears that UP.
struct ModelSetting {
  std::string up_device;
  double up_airtime_s = 0;
  std::vector<double> dcp_airtimes_s;  // one per DCP source
  double period_s = 0;
  double sigma_s = 0;
  bool dual_gateway = false;  // an rx-only gateway also hears the UP sender
};

inline std::vector<std::string> up_senders(const ScenarioConfig& cfg) {
  std::set<std::string> scopes;
  for (const auto& e : cfg.events) {
    if (e.periodic) scopes.insert(e.periodic->scope);
    for (const auto& g : e.script) scopes.insert(g.scope);
  }
  std::vector<std::string> out;
  for (const auto& c : cfg.clusters)
    if (scopes.contains(c.name)) out.insert(out.end(), c.members.begin(), c.members.end());
  return out;
}

inline ModelSetting derive_model_setting(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto senders = up_senders(cfg);
  if (senders.size() != 1)
    throw ValidationError("analytic model needs exactly one UP-sending device, scenario has " +
                          std::to_string(senders.size()));
  ModelSetting m;
  m.up_device = senders.front();
  const auto* up = cfg.find_device(m.up_device);

  std::map<std::string, server::DeviceProfile> profiles;
  for (const auto& d : cfg.devices) profiles[d.radio.name] = {d.radio.cluster, d.radio.receive_delay1, d.radio.receive_delay2};
  const server::NetworkServer srv(cfg.clusters, profiles, cfg.channel_plan().rx2_channel(), cfg.dcp_phy_payload);
  const auto assignment = srv.assignment_of(m.up_device);
  if (!assignment) throw ValidationError("devices." + m.up_device + ": no UP assignment");
  m.up_airtime_s =
      phy::airtime(phy::lora_params(assignment->sf), up->radio.up_app_payload + phy::kMacOverheadBytes).to_seconds();

  std::set<std::string> hearing;
  for (const auto& g : cfg.gateways) {
    const bool covers = up->gateways.empty() ||
                        std::find(up->gateways.begin(), up->gateways.end(), g.name) != up->gateways.end();
    if (!covers) continue;
    if (g.role == gateway::Role::rx_only)
      m.dual_gateway = true;
    else
      hearing.insert(g.name);
  }

  std::optional<Duration> period, sigma;
  for (const auto& d : cfg.devices) {
    if (!d.radio.sends_rp) continue;
    if (!hearing.contains(cfg.find_cluster(d.radio.cluster)->dcp_gateway)) continue;
    if (period && *period != d.radio.rp_period)
      throw ValidationError("analytic model needs one RP period; devices." + d.radio.name + " differs");
    if (sigma && *sigma != d.radio.clock_sigma)
      throw ValidationError("analytic model needs one clock sigma; devices." + d.radio.name + " differs");
    period = d.radio.rp_period;
    sigma = d.radio.clock_sigma;
    m.dcp_airtimes_s.push_back(phy::airtime(phy::lora_params(d.radio.rp_sf), cfg.dcp_phy_payload).to_seconds());
  }
  if (m.dcp_airtimes_s.empty()) throw ValidationError("analytic model needs DCP traffic; no RP sender reaches the UP gateway");
  m.period_s = period->to_seconds();
  m.sigma_s = sigma->to_seconds();
  return m;
}

struct ValidationOutcome {
  ModelSetting setting;
  metrics::RunReport report;
  metrics::PlrEstimate simulated;
  double analytic_plr = 0;  // exact fixed-airtime value; 0.001 ceiling in dual-gateway mode
  bool passed = false;
  std::string rule;
};

struct ValidationOptions {
  std::optional<double> relative_tolerance;  // unset: analytic value must lie in the 95% CI
  bool dual_gateway = false;
  std::optional<Duration> sigma_override;
  int replications = 1;
  int workers = 1;
};

inline constexpr double kDualGatewayPlrCeiling = 0.001;

inline ValidationOutcome validate_against_model(ScenarioConfig cfg, std::uint64_t seed, const ValidationOptions& opt) {
  if (opt.relative_tolerance && !(*opt.relative_tolerance > 0))
    throw std::invalid_argument("relative tolerance must be positive");
  if (opt.sigma_override)
    for (auto& d : cfg.devices) d.radio.clock_sigma = *opt.sigma_override;

  ValidationOutcome out;
  out.setting = derive_model_setting(cfg);
  if (out.setting.dual_gateway && !opt.dual_gateway)
    throw ValidationError("an rx-only gateway hears " + out.setting.up_device +
                          ": the DCP-collision model does not apply; use the dual-gateway check");
  if (!out.setting.dual_gateway && opt.dual_gateway)
    throw ValidationError("dual-gateway check requested but no rx-only gateway hears " + out.setting.up_device);

  out.report = run_replications(cfg, seed, opt.replications, opt.workers);
  out.simulated = metrics::plr(out.report.up.delivered, out.report.up.generated);

  if (opt.dual_gateway) {
    out.analytic_plr = kDualGatewayPlrCeiling;
    out.passed = out.simulated.estimate < kDualGatewayPlrCeiling;
    out.rule = "simulated PLR < 0.1%";
    return out;
  }
  const auto& s = out.setting;
  out.analytic_plr = analytic::plr_exact_fixed(s.dcp_airtimes_s, s.up_airtime_s, s.period_s, s.sigma_s).plr;
  if (opt.relative_tolerance) {
    out.passed = std::abs(out.simulated.estimate - out.analytic_plr) <= *opt.relative_tolerance * out.analytic_plr;
    out.rule = "relative difference <= " + std::to_string(*opt.relative_tolerance);
  } else {
    out.passed = out.simulated.ci95.contains(out.analytic_plr);
    out.rule = "analytic PLR inside the simulated 95% Wilson interval";
  }
  return out;
}

}  // namespace lorafmar::sim
