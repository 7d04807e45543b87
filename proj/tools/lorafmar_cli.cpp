#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lorafmar/lorafmar.hpp"

namespace {

using namespace lorafmar;

enum Exit : int { ok = 0, parse_error = 2, validation_error = 3, runtime_error = 4, validation_failed = 5 };

Duration parse_duration_flag(const std::string& flag, const std::string& text) {
  sim::io::Reader r(flag);
  return r.duration(YAML::Node(text), flag);
}

int workers_for(int replications) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return std::max(1, std::min(replications, static_cast<int>(hw)));
}

void print_plr(std::ostream& os, const char* label, const metrics::PlrEstimate& e) {
  os << std::fixed << std::setprecision(4) << label << e.estimate * 100 << " %  (95% CI " << e.ci95.lo * 100 << " .. "
     << e.ci95.hi * 100 << " %)\n";
}

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string format = "json";
  bool quiet = false;
  int replications = 1;
};

int cmd_run(const RunArgs& a) {
  const auto cfg = sim::load_scenario(a.scenario);
  cfg.validate();
  const auto fmt = metrics::format_from_string(a.format);
  const std::uint64_t seed = a.seed.value_or(cfg.seed);
  auto report = sim::run_replications(cfg, seed, a.replications, workers_for(a.replications));
  report.scenario_digest = sim::scenario_digest(cfg);

  if (a.out) {
    metrics::write_report(*a.out, report, fmt);
  } else {
    std::optional<std::string> path = fmt == metrics::Format::json ? cfg.outputs.json : cfg.outputs.csv;
    if (path)
      metrics::write_report(*path, report, fmt);
    else
      std::cout << metrics::emit_report(report, fmt);
  }
  if (!a.quiet && (a.out || cfg.outputs.json || cfg.outputs.csv)) {
    std::cerr << report.scenario_name << ": " << report.alarm_events << " alarm events, "
              << report.up.generated << " UPs\n";
    if (report.up.generated > 0) print_plr(std::cerr, "UP PLR ", metrics::plr(report.up.delivered, report.up.generated));
  }
  return ok;
}

struct AirtimeArgs {
  int sf = 7;
  int bw_khz = 125;
  int cr = 1;
  int payload = phy::kUrgentPhyPayloadBytes;
  int preamble = 8;
  bool implicit_header = false;
  std::string ldro = "auto";
};

int cmd_airtime(const AirtimeArgs& a) {
  phy::RadioParams p;
  p.sf = a.sf;
  p.bandwidth_hz = a.bw_khz * 1000;
  p.coding_rate = a.cr;
  p.preamble_symbols = a.preamble;
  p.explicit_header = !a.implicit_header;
  if (a.ldro == "on") p.low_data_rate_opt = true;
  else if (a.ldro == "off") p.low_data_rate_opt = false;
  const auto b = phy::airtime_breakdown(p, a.payload);
  std::cout << std::fixed << std::setprecision(3) << b.total.count() / 1000.0 << " ms\n";
  std::cout << std::setprecision(3) << "  symbol time      " << b.symbol_time_s * 1e3 << " ms\n"
            << std::setprecision(2) << "  preamble symbols " << b.preamble_symbols << '\n'
            << "  payload symbols  " << b.payload_symbols << '\n'
            << "  low data rate    " << (p.effective_ldro() ? "on" : "off") << '\n';
  if (b.total > phy::kUrgentLatencyBudget) std::cout << "  exceeds UP latency budget (500 ms)\n";
  return ok;
}

struct AnalyzeArgs {
  int devices = 8;
  std::string period = "70 s";
  std::string sigma = "50 ms";
  std::string tau = "82.176 ms";
  std::string d = "267.264 ms";
  std::string method = "approx";
};

int cmd_analyze(const AnalyzeArgs& a) {
  analytic::PlrModelParams p;
  p.devices = a.devices;
  p.period_s = parse_duration_flag("--period", a.period).to_seconds();
  p.sigma_s = parse_duration_flag("--sigma", a.sigma).to_seconds();
  p.dcp_airtime = analytic::AirtimeMix::point(parse_duration_flag("--tau", a.tau).to_seconds());
  p.up_airtime = analytic::AirtimeMix::point(parse_duration_flag("--d", a.d).to_seconds());
  const auto m = analytic::method_from_string(a.method);
  const bool regime = analytic::within_regime(p.dcp_airtime.max() + p.up_airtime.max(), p.period_s, p.sigma_s);
  if (!regime) {
    std::cout << "out-of-regime: tau + D >= T - 5 sigma\n";
    return validation_error;
  }
  const auto r = analytic::evaluate(p, m);
  std::cout << std::setprecision(10) << "P_C    " << r.p_collision_free << '\n'
            << "PLR    " << r.plr << "  (" << std::setprecision(4) << r.plr * 100 << " %)\n"
            << "method " << analytic::to_string(r.method) << '\n'
            << "regime " << (r.in_regime ? "ok" : "out-of-regime") << '\n';
  return ok;
}

struct ValidateArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> rel_tol;
  bool dual_gw = false;
  std::vector<std::string> sigmas;
  int replications = 1;
  bool quiet = false;
};

int cmd_validate(const ValidateArgs& a) {
  const auto cfg = sim::load_scenario(a.scenario);
  const std::uint64_t seed = a.seed.value_or(cfg.seed);
  std::vector<std::optional<Duration>> sweep;
  for (const auto& s : a.sigmas) sweep.push_back(parse_duration_flag("--sigma", s));
  if (sweep.empty()) sweep.push_back(std::nullopt);

  bool all = true;
  for (const auto& sigma : sweep) {
    sim::ValidationOptions opt;
    opt.relative_tolerance = a.rel_tol;
    opt.dual_gateway = a.dual_gw;
    opt.sigma_override = sigma;
    opt.replications = a.replications;
    opt.workers = workers_for(a.replications);
    const auto v = sim::validate_against_model(cfg, seed, opt);
    all = all && v.passed;
    if (a.quiet) continue;
    std::cout << cfg.name;
    if (sigma) std::cout << "  sigma=" << sim::io::format_duration(*sigma);
    std::cout << '\n';
    std::cout << "  UP device   " << v.setting.up_device << "  (" << v.report.up.generated << " UPs, "
              << v.report.up.generated - v.report.up.delivered << " lost)\n";
    print_plr(std::cout, "  simulated   ", v.simulated);
    if (a.dual_gw)
      std::cout << "  ceiling     0.1000 %\n";
    else
      std::cout << std::fixed << std::setprecision(4) << "  analytic    " << v.analytic_plr * 100 << " %  (N=" << v.setting.dcp_airtimes_s.size()
                << ", D=" << v.setting.up_airtime_s * 1e3 << " ms)\n";
    std::cout << "  rule        " << v.rule << '\n' << "  result      " << (v.passed ? "PASS" : "FAIL") << '\n';
  }
  return all ? ok : validation_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LoRaWAN fire-alarm network simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write the report");
  run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--out", run.out, "Report path (default: scenario outputs, else stdout)");
  run_cmd->add_option("--format", run.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  run_cmd->add_flag("--quiet", run.quiet, "No summary on stderr");
  run_cmd->add_option("--replications", run.replications, "Independent replications (seeds seed, seed+1, ...)")
      ->check(CLI::PositiveNumber);

  AirtimeArgs air;
  auto* air_cmd = app.add_subcommand("airtime", "LoRa time on air");
  air_cmd->add_option("--sf", air.sf, "Spreading factor 7..12")->required();
  air_cmd->add_option("--bw", air.bw_khz, "Bandwidth in kHz");
  air_cmd->add_option("--cr", air.cr, "Coding rate index 1..4 (4/5..4/8)");
  air_cmd->add_option("--payload", air.payload, "PHY payload bytes");
  air_cmd->add_option("--preamble", air.preamble, "Programmed preamble symbols");
  air_cmd->add_flag("--implicit-header", air.implicit_header, "Implicit header mode");
  air_cmd->add_option("--ldro", air.ldro, "Low data rate optimisation")->check(CLI::IsMember({"auto", "on", "off"}));
  bool air_quiet = false;
  air_cmd->add_flag("--quiet", air_quiet, "Accepted for symmetry");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Analytic UP loss due to DCP preemption");
  an_cmd->add_option("-N,--devices", an.devices, "DCP sources")->check(CLI::NonNegativeNumber);
  an_cmd->add_option("--period", an.period, "RP period, with unit");
  an_cmd->add_option("--sigma", an.sigma, "Clock error std, with unit");
  an_cmd->add_option("--tau", an.tau, "DCP airtime, with unit");
  an_cmd->add_option("--d", an.d, "UP airtime, with unit");
  an_cmd->add_option("--method", an.method, "exact, marginal or approx");

  ValidateArgs va;
  auto* va_cmd = app.add_subcommand("validate", "Compare simulated and analytic UP loss");
  va_cmd->add_option("scenario", va.scenario, "Scenario file")->required();
  va_cmd->add_option("--seed", va.seed, "Override the scenario seed");
  va_cmd->add_option("--rel-tol", va.rel_tol, "Pass on relative difference instead of CI containment");
  va_cmd->add_flag("--dual-gw", va.dual_gw, "Scenario has an rx-only gateway: check PLR < 0.1%");
  va_cmd->add_option("--sigma", va.sigmas, "Clock sigma override; repeat for a sweep");
  va_cmd->add_option("--replications", va.replications, "Independent replications")->check(CLI::PositiveNumber);
  va_cmd->add_flag("--quiet", va.quiet, "Exit status only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*air_cmd) return cmd_airtime(air);
    if (*an_cmd) return cmd_analyze(an);
    if (*va_cmd) return cmd_validate(va);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return parse_error;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return validation_error;
  } catch (const ModelRegimeError& e) {
    std::cerr << "out-of-regime: " << e.what() << '\n';
    return validation_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return validation_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return runtime_error;
  }
  return runtime_error;
}
