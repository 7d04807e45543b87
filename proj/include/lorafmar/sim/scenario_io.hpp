#pragma once

// YAML scenario reader/writer. Every physical quantity carries an explicit
// unit suffix ("70 s", "867.1 MHz", "-90 dBm", "29.66 %"); bare numbers are
// only accepted for counts, spreading factors and byte lengths.
//
// Requires yaml-cpp.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "lorafmar/core/error.hpp"
#include "lorafmar/core/random.hpp"
#include "lorafmar/sim/scenario.hpp"

namespace lorafmar::sim {

namespace io {

struct Quantity {
  double value = 0;
  std::string unit;
};

inline Quantity split_quantity(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  const char* begin = text.data() + i;
  const char* end = text.data() + text.size();
  Quantity q;
  auto [ptr, ec] = std::from_chars(begin, end, q.value);
  if (ec != std::errc()) throw std::invalid_argument("'" + text + "' does not start with a number");
  std::string unit(ptr, end);
  const auto b = unit.find_first_not_of(' ');
  const auto e = unit.find_last_not_of(' ');
  q.unit = b == std::string::npos ? "" : unit.substr(b, e - b + 1);
  return q;
}

// Shortest decimal that parses back to exactly `v`.
inline std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Decimal for v * scale such that parsing and dividing by scale gives v back.
inline std::string scaled(double v, double scale) {
  const double target = v * scale;
  for (double cand : {target, std::nextafter(target, INFINITY), std::nextafter(target, -INFINITY)}) {
    const std::string s = shortest(cand);
    if (std::stod(s) / scale == v) return s;
  }
  return shortest(target);
}

inline std::string format_duration(Duration d) {
  const auto us = d.count();
  if (us % 1000000 == 0) return std::to_string(us / 1000000) + " s";
  if (us % 1000 == 0) return std::to_string(us / 1000) + " ms";
  return std::to_string(us) + " us";
}

inline std::string format_frequency(phy::Frequency f) {
  if (f.hz % 1000 != 0) return std::to_string(f.hz) + " Hz";
  std::string s = std::to_string(f.hz / 1000000) + "." ;
  char frac[8];
  std::snprintf(frac, sizeof frac, "%06lld", static_cast<long long>(f.hz % 1000000));
  std::string fr(frac);
  while (fr.size() > 1 && fr.back() == '0') fr.pop_back();
  return s + fr + " MHz";
}

inline std::string format_time(SimTime t) { return format_duration(t - SimTime::zero()); }

// Parsing context: file name plus the dotted path of the field being read.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& path, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (n.IsDefined() && n.Mark().line >= 0) os << ':' << n.Mark().line + 1 << ':' << n.Mark().column + 1;
    os << ": " << path << ": " << msg;
    throw ParseError(os.str());
  }

  void expect_keys(const YAML::Node& n, const std::string& path, std::initializer_list<std::string_view> allowed) const {
    if (!n.IsMap()) fail(n, path, "expected a mapping");
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) fail(kv.first, path, "unknown field '" + key + "'");
    }
  }

  std::string str(const YAML::Node& n, const std::string& path) const {
    if (!n.IsScalar()) fail(n, path, "expected a scalar");
    return n.as<std::string>();
  }

  template <typename Int>
  Int integer(const YAML::Node& n, const std::string& path) const {
    const auto s = str(n, path);
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(n, path, "expected an integer, got '" + s + "'");
    return v;
  }

  bool boolean(const YAML::Node& n, const std::string& path) const {
    const auto s = str(n, path);
    if (s == "true") return true;
    if (s == "false") return false;
    fail(n, path, "expected true or false, got '" + s + "'");
  }

  double plain(const YAML::Node& n, const std::string& path) const {
    const auto q = quantity(n, path);
    if (!q.unit.empty()) fail(n, path, "expected a plain number, got unit '" + q.unit + "'");
    return q.value;
  }

  Quantity quantity(const YAML::Node& n, const std::string& path) const {
    try {
      return split_quantity(str(n, path));
    } catch (const std::invalid_argument& e) {
      fail(n, path, e.what());
    }
  }

  Duration duration(const YAML::Node& n, const std::string& path) const {
    const auto q = quantity(n, path);
    if (q.unit == "us") return Duration::seconds(q.value * 1e-6);
    if (q.unit == "ms") return Duration::seconds(q.value * 1e-3);
    if (q.unit == "s") return Duration::seconds(q.value);
    if (q.unit == "min") return Duration::seconds(q.value * 60);
    if (q.unit == "h") return Duration::seconds(q.value * 3600);
    if (q.unit.empty()) fail(n, path, "missing time unit (us, ms, s, min, h)");
    fail(n, path, "unknown time unit '" + q.unit + "'");
  }

  phy::Frequency frequency(const YAML::Node& n, const std::string& path) const {
    const auto q = quantity(n, path);
    if (q.unit == "Hz") return phy::Frequency{std::llround(q.value)};
    if (q.unit == "kHz") return phy::Frequency{std::llround(q.value * 1e3)};
    if (q.unit == "MHz") return phy::Frequency{std::llround(q.value * 1e6)};
    if (q.unit.empty()) fail(n, path, "missing frequency unit (Hz, kHz, MHz)");
    fail(n, path, "unknown frequency unit '" + q.unit + "'");
  }

  double with_unit(const YAML::Node& n, const std::string& path, std::string_view unit) const {
    const auto q = quantity(n, path);
    if (q.unit != unit) fail(n, path, "expected unit '" + std::string(unit) + "'" + (q.unit.empty() ? "" : ", got '" + q.unit + "'"));
    return q.value;
  }

  // Percent string -> fraction in [0, 1].
  double fraction(const YAML::Node& n, const std::string& path) const {
    const double v = with_unit(n, path, "%") / 100.0;
    if (v < 0 || v > 1) fail(n, path, "percentage outside 0..100");
    return v;
  }

  template <typename F>
  auto enumerated(const YAML::Node& n, const std::string& path, F&& parse) const {
    try {
      return parse(str(n, path));
    } catch (const std::invalid_argument& e) {
      fail(n, path, e.what());
    }
  }

 private:
  std::string source_;
};

inline device::UpAssignment read_assignment(const Reader& r, const YAML::Node& n, const std::string& path) {
  r.expect_keys(n, path, {"channel", "sf"});
  if (!n["channel"] || !n["sf"]) r.fail(n, path, "needs channel and sf");
  return {r.frequency(n["channel"], path + ".channel"), r.integer<int>(n["sf"], path + ".sf")};
}

inline void read_device_fields(const Reader& r, const YAML::Node& n, const std::string& path, DeviceEntry& d) {
  auto& c = d.radio;
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    const std::string p = path + "." + key;
    if (key == "id") c.name = r.str(v, p);
    else if (key == "cluster") c.cluster = r.str(v, p);
    else if (key == "rp_period") c.rp_period = r.duration(v, p);
    else if (key == "clock_sigma") c.clock_sigma = r.duration(v, p);
    else if (key == "interarrival_floor") c.interarrival_floor = r.duration(v, p);
    else if (key == "sends_rp") c.sends_rp = r.boolean(v, p);
    else if (key == "first_rp_offset") c.first_rp_offset = r.duration(v, p);
    else if (key == "rp_subband") c.rp_subband = r.enumerated(v, p, phy::subband_from_string);
    else if (key == "up_subband") c.up_subband = r.enumerated(v, p, phy::subband_from_string);
    else if (key == "rp_sf") c.rp_sf = r.integer<int>(v, p);
    else if (key == "rp_phy_payload_bytes") c.rp_phy_payload = r.integer<int>(v, p);
    else if (key == "up_app_payload_bytes") c.up_app_payload = r.integer<int>(v, p);
    else if (key == "initial_assignment") c.initial_assignment = read_assignment(r, v, p);
    else if (key == "receive_delay1") c.receive_delay1 = r.duration(v, p);
    else if (key == "receive_delay2") c.receive_delay2 = r.duration(v, p);
    else if (key == "rx_power") c.rx_power_dbm = r.with_unit(v, p, "dBm");
    else if (key == "gateways") {
      d.gateways.clear();
      if (!v.IsSequence()) r.fail(v, p, "expected a list of gateway ids");
      for (std::size_t i = 0; i < v.size(); ++i) d.gateways.push_back(r.str(v[i], p));
    } else {
      r.fail(kv.first, path, "unknown field '" + key + "'");
    }
  }
}

inline std::vector<phy::Frequency> read_channels(const Reader& r, const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) r.fail(n, path, "expected a list of frequencies");
  std::vector<phy::Frequency> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(r.frequency(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline sensor::GasEvent read_gas_event(const Reader& r, const YAML::Node& n, const std::string& path);

inline std::pair<sensor::Species, double> read_gas_level(const Reader& r, const YAML::Node& species,
                                                         const YAML::Node& level, const std::string& path) {
  const auto s = r.enumerated(species, path + ".species", sensor::species_from_string);
  const auto q = r.quantity(level, path + ".level");
  const std::string want = sensor::is_combustible(s) ? "%vol" : (s == sensor::Species::co ? "ppm" : "%");
  if (q.unit != want) r.fail(level, path + ".level", "expected unit '" + want + "' for " + std::string(to_string(s)));
  return {s, q.value};
}

inline sensor::GasEvent read_gas_event(const Reader& r, const YAML::Node& n, const std::string& path) {
  r.expect_keys(n, path, {"at", "scope", "species", "level"});
  if (!n["at"] || !n["scope"] || !n["species"] || !n["level"]) r.fail(n, path, "needs at, scope, species, level");
  sensor::GasEvent e;
  e.at = SimTime::zero() + r.duration(n["at"], path + ".at");
  e.scope = r.str(n["scope"], path + ".scope");
  std::tie(e.species, e.level) = read_gas_level(r, n["species"], n["level"], path);
  return e;
}

}  // namespace io

// Parses scenario YAML text. `source` names the origin in error messages.
inline ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
  using io::Reader;
  Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                     ": " + e.msg);
  }
  r.expect_keys(root, "<root>",
                {"name", "description", "seed", "stop", "channels", "duty_cycle", "capture", "dcp_phy_payload_bytes",
                 "gateways", "device_defaults", "devices", "clusters", "sensor", "events", "outputs"});

  ScenarioConfig cfg;
  if (root["name"]) cfg.name = r.str(root["name"], "name");
  if (root["description"]) cfg.description = r.str(root["description"], "description");
  if (root["seed"]) cfg.seed = r.integer<std::uint64_t>(root["seed"], "seed");
  if (root["dcp_phy_payload_bytes"]) cfg.dcp_phy_payload = r.integer<int>(root["dcp_phy_payload_bytes"], "dcp_phy_payload_bytes");

  if (const auto n = root["stop"]) {
    r.expect_keys(n, "stop", {"alarm_events", "duration", "drain"});
    if (n["alarm_events"]) cfg.stop.alarm_events = r.integer<std::uint64_t>(n["alarm_events"], "stop.alarm_events");
    if (n["duration"]) cfg.stop.duration = r.duration(n["duration"], "stop.duration");
    if (n["drain"]) cfg.stop.drain = r.duration(n["drain"], "stop.drain");
  }

  if (const auto n = root["channels"]) {
    if (!n.IsMap()) r.fail(n, "channels", "expected a mapping of sub-band -> channel list");
    for (const auto& kv : n) {
      const auto band = r.enumerated(kv.first, "channels", phy::subband_from_string);
      cfg.channel_overrides[band] = io::read_channels(r, kv.second, "channels." + kv.first.as<std::string>());
    }
  }

  if (const auto n = root["duty_cycle"]) {
    r.expect_keys(n, "duty_cycle", {"device_policy", "gateway_policy", "window"});
    if (n["device_policy"])
      cfg.duty_cycle.device_policy = r.enumerated(n["device_policy"], "duty_cycle.device_policy", phy::duty_cycle_policy_from_string);
    if (n["gateway_policy"])
      cfg.duty_cycle.gateway_policy = r.enumerated(n["gateway_policy"], "duty_cycle.gateway_policy", phy::duty_cycle_policy_from_string);
    if (n["window"]) cfg.duty_cycle.window = r.duration(n["window"], "duty_cycle.window");
  }

  if (const auto n = root["capture"]) {
    r.expect_keys(n, "capture", {"mode", "co_sf_margin", "inter_sf_isolation", "unlisted_same_sf_survival",
                                 "unlisted_cross_sf_survival", "pairs"});
    auto& c = cfg.capture;
    if (n["mode"]) c.mode = r.enumerated(n["mode"], "capture.mode", phy::capture_mode_from_string);
    if (n["co_sf_margin"]) c.co_sf_capture_margin_db = r.with_unit(n["co_sf_margin"], "capture.co_sf_margin", "dB");
    if (n["inter_sf_isolation"]) c.inter_sf_isolation_db = r.with_unit(n["inter_sf_isolation"], "capture.inter_sf_isolation", "dB");
    if (n["unlisted_same_sf_survival"])
      c.unlisted_same_sf_survival = r.fraction(n["unlisted_same_sf_survival"], "capture.unlisted_same_sf_survival");
    if (n["unlisted_cross_sf_survival"])
      c.unlisted_cross_sf_survival = r.fraction(n["unlisted_cross_sf_survival"], "capture.unlisted_cross_sf_survival");
    if (const auto pairs = n["pairs"]) {
      if (!pairs.IsSequence()) r.fail(pairs, "capture.pairs", "expected a list");
      c.pairs.clear();
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string p = "capture.pairs[" + std::to_string(i) + "]";
        const auto& e = pairs[i];
        r.expect_keys(e, p, {"sf", "loss", "both"});
        if (!e["sf"].IsSequence() || e["sf"].size() != 2) r.fail(e, p + ".sf", "expected [sf_a, sf_b]");
        if (!e["loss"].IsSequence() || e["loss"].size() != 2) r.fail(e, p + ".loss", "expected [loss_a %, loss_b %]");
        if (!e["both"]) r.fail(e, p, "needs both");
        phy::PairLossObservation o;
        o.sf_a = r.integer<int>(e["sf"][0], p + ".sf");
        o.sf_b = r.integer<int>(e["sf"][1], p + ".sf");
        o.loss_a = r.fraction(e["loss"][0], p + ".loss");
        o.loss_b = r.fraction(e["loss"][1], p + ".loss");
        o.loss_both = r.fraction(e["both"], p + ".both");
        c.pairs.push_back(o);
      }
    }
  }

  if (const auto n = root["gateways"]) {
    if (!n.IsSequence()) r.fail(n, "gateways", "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string p = "gateways[" + std::to_string(i) + "]";
      const auto& g = n[i];
      r.expect_keys(g, p, {"id", "role", "demod_paths", "backhaul", "preemption"});
      if (!g["id"]) r.fail(g, p, "needs id");
      gateway::GatewayConfig gc;
      gc.name = r.str(g["id"], p + ".id");
      if (g["role"]) gc.role = r.enumerated(g["role"], p + ".role", gateway::role_from_string);
      if (g["demod_paths"]) gc.demod_paths = r.integer<int>(g["demod_paths"], p + ".demod_paths");
      if (g["backhaul"]) gc.backhaul_delay = r.duration(g["backhaul"], p + ".backhaul");
      if (g["preemption"]) gc.preemption = r.enumerated(g["preemption"], p + ".preemption", gateway::preemption_scope_from_string);
      cfg.gateways.push_back(gc);
    }
  }

  DeviceEntry defaults;
  if (const auto n = root["device_defaults"]) {
    if (!n.IsMap()) r.fail(n, "device_defaults", "expected a mapping");
    if (n["id"]) r.fail(n["id"], "device_defaults", "defaults cannot carry an id");
    io::read_device_fields(r, n, "device_defaults", defaults);
  }
  if (const auto n = root["devices"]) {
    if (!n.IsSequence()) r.fail(n, "devices", "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string p = "devices[" + std::to_string(i) + "]";
      if (!n[i].IsMap()) r.fail(n[i], p, "expected a mapping");
      if (!n[i]["id"]) r.fail(n[i], p, "needs id");
      DeviceEntry d = defaults;
      io::read_device_fields(r, n[i], p, d);
      cfg.devices.push_back(std::move(d));
    }
  }

  if (const auto n = root["clusters"]) {
    if (!n.IsSequence()) r.fail(n, "clusters", "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string p = "clusters[" + std::to_string(i) + "]";
      const auto& c = n[i];
      r.expect_keys(c, p, {"id", "members", "dcp_gateway", "up_channels", "single_sf", "stack_sfs", "forced_assignments"});
      if (!c["id"] || !c["members"] || !c["dcp_gateway"]) r.fail(c, p, "needs id, members, dcp_gateway");
      server::ClusterConfig cc;
      cc.name = r.str(c["id"], p + ".id");
      if (!c["members"].IsSequence()) r.fail(c["members"], p + ".members", "expected a list");
      for (std::size_t k = 0; k < c["members"].size(); ++k) cc.members.push_back(r.str(c["members"][k], p + ".members"));
      cc.dcp_gateway = r.str(c["dcp_gateway"], p + ".dcp_gateway");
      if (c["up_channels"]) cc.up_channels = io::read_channels(r, c["up_channels"], p + ".up_channels");
      if (c["single_sf"]) cc.policy.single_sf = r.integer<int>(c["single_sf"], p + ".single_sf");
      if (const auto s = c["stack_sfs"]) {
        if (!s.IsSequence()) r.fail(s, p + ".stack_sfs", "expected a list");
        cc.policy.stack_sfs.clear();
        for (std::size_t k = 0; k < s.size(); ++k) cc.policy.stack_sfs.push_back(r.integer<int>(s[k], p + ".stack_sfs"));
      }
      if (const auto f = c["forced_assignments"]) {
        if (!f.IsMap()) r.fail(f, p + ".forced_assignments", "expected a mapping device -> {channel, sf}");
        for (const auto& kv : f) {
          const auto dev = kv.first.as<std::string>();
          cc.forced_assignments[dev] = io::read_assignment(r, kv.second, p + ".forced_assignments." + dev);
        }
      }
      cfg.clusters.push_back(std::move(cc));
    }
  }

  if (const auto n = root["sensor"]) {
    r.expect_keys(n, "sensor", {"methane_sensitivity", "propane_butane_relative", "alarm_voltage", "co_max",
                                "co_resolution", "co_alarm", "o2_min", "o2_max", "o2_resolution", "o2_deficiency"});
    auto& s = cfg.sensor;
    if (n["methane_sensitivity"]) s.methane_sensitivity_pct_per_volt = r.with_unit(n["methane_sensitivity"], "sensor.methane_sensitivity", "%/V");
    if (n["propane_butane_relative"]) s.propane_butane_relative_sensitivity = r.plain(n["propane_butane_relative"], "sensor.propane_butane_relative");
    if (n["alarm_voltage"]) s.catalytic_alarm_volts = r.with_unit(n["alarm_voltage"], "sensor.alarm_voltage", "V");
    if (n["co_max"]) s.co_max_ppm = r.with_unit(n["co_max"], "sensor.co_max", "ppm");
    if (n["co_resolution"]) s.co_resolution_ppm = r.with_unit(n["co_resolution"], "sensor.co_resolution", "ppm");
    if (n["co_alarm"]) s.co_alarm_ppm = r.with_unit(n["co_alarm"], "sensor.co_alarm", "ppm");
    if (n["o2_min"]) s.o2_min_pct = r.with_unit(n["o2_min"], "sensor.o2_min", "%");
    if (n["o2_max"]) s.o2_max_pct = r.with_unit(n["o2_max"], "sensor.o2_max", "%");
    if (n["o2_resolution"]) s.o2_resolution_pct = r.with_unit(n["o2_resolution"], "sensor.o2_resolution", "%");
    if (n["o2_deficiency"]) s.o2_deficiency_pct = r.with_unit(n["o2_deficiency"], "sensor.o2_deficiency", "%");
  }

  if (const auto n = root["events"]) {
    if (!n.IsSequence()) r.fail(n, "events", "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string p = "events[" + std::to_string(i) + "]";
      const auto& e = n[i];
      r.expect_keys(e, p, {"periodic", "script"});
      EventEntry entry;
      if (const auto per = e["periodic"]) {
        const std::string pp = p + ".periodic";
        r.expect_keys(per, pp, {"scope", "interval", "species", "level", "first_at"});
        if (!per["scope"] || !per["interval"] || !per["species"] || !per["level"])
          r.fail(per, pp, "needs scope, interval, species, level");
        sensor::EventSource::Periodic pd;
        pd.scope = r.str(per["scope"], pp + ".scope");
        const auto iv = per["interval"];
        if (!iv.IsSequence() || iv.size() != 2) r.fail(iv, pp + ".interval", "expected [min, max]");
        pd.min_interval = r.duration(iv[0], pp + ".interval");
        pd.max_interval = r.duration(iv[1], pp + ".interval");
        std::tie(pd.species, pd.level) = io::read_gas_level(r, per["species"], per["level"], pp);
        if (per["first_at"]) pd.first_at = r.duration(per["first_at"], pp + ".first_at");
        entry.periodic = pd;
      } else if (const auto sc = e["script"]) {
        if (!sc.IsSequence()) r.fail(sc, p + ".script", "expected a list");
        for (std::size_t k = 0; k < sc.size(); ++k)
          entry.script.push_back(io::read_gas_event(r, sc[k], p + ".script[" + std::to_string(k) + "]"));
      } else {
        r.fail(e, p, "needs periodic or script");
      }
      cfg.events.push_back(std::move(entry));
    }
  }

  if (const auto n = root["outputs"]) {
    r.expect_keys(n, "outputs", {"json", "csv"});
    if (n["json"]) cfg.outputs.json = r.str(n["json"], "outputs.json");
    if (n["csv"]) cfg.outputs.csv = r.str(n["csv"], "outputs.csv");
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

// Canonical YAML: every field spelled out, defaults included, so that
// parse(serialize(c)) == c.
inline std::string serialize_scenario(const ScenarioConfig& cfg) {
  using namespace io;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.name;
  if (!cfg.description.empty()) out << YAML::Key << "description" << YAML::Value << cfg.description;
  out << YAML::Key << "seed" << YAML::Value << std::to_string(cfg.seed);

  out << YAML::Key << "stop" << YAML::Value << YAML::BeginMap;
  if (cfg.stop.alarm_events) out << YAML::Key << "alarm_events" << YAML::Value << std::to_string(*cfg.stop.alarm_events);
  if (cfg.stop.duration) out << YAML::Key << "duration" << YAML::Value << format_duration(*cfg.stop.duration);
  out << YAML::Key << "drain" << YAML::Value << format_duration(cfg.stop.drain);
  out << YAML::EndMap;

  if (!cfg.channel_overrides.empty()) {
    out << YAML::Key << "channels" << YAML::Value << YAML::BeginMap;
    for (const auto& [band, chans] : cfg.channel_overrides) {
      out << YAML::Key << std::string(to_string(band)) << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (auto f : chans) out << format_frequency(f);
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }

  out << YAML::Key << "duty_cycle" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "device_policy" << YAML::Value << std::string(to_string(cfg.duty_cycle.device_policy));
  out << YAML::Key << "gateway_policy" << YAML::Value << std::string(to_string(cfg.duty_cycle.gateway_policy));
  out << YAML::Key << "window" << YAML::Value << format_duration(cfg.duty_cycle.window);
  out << YAML::EndMap;

  const auto& cap = cfg.capture;
  out << YAML::Key << "capture" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(cap.mode));
  out << YAML::Key << "co_sf_margin" << YAML::Value << shortest(cap.co_sf_capture_margin_db) + " dB";
  out << YAML::Key << "inter_sf_isolation" << YAML::Value << shortest(cap.inter_sf_isolation_db) + " dB";
  out << YAML::Key << "unlisted_same_sf_survival" << YAML::Value << scaled(cap.unlisted_same_sf_survival, 100) + " %";
  out << YAML::Key << "unlisted_cross_sf_survival" << YAML::Value << scaled(cap.unlisted_cross_sf_survival, 100) + " %";
  out << YAML::Key << "pairs" << YAML::Value << YAML::BeginSeq;
  for (const auto& o : cap.pairs) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "sf" << YAML::Value << YAML::Flow << YAML::BeginSeq << o.sf_a << o.sf_b << YAML::EndSeq;
    out << YAML::Key << "loss" << YAML::Value << YAML::Flow << YAML::BeginSeq << scaled(o.loss_a, 100) + " %"
        << scaled(o.loss_b, 100) + " %" << YAML::EndSeq;
    out << YAML::Key << "both" << YAML::Value << scaled(o.loss_both, 100) + " %";
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "dcp_phy_payload_bytes" << YAML::Value << cfg.dcp_phy_payload;

  out << YAML::Key << "gateways" << YAML::Value << YAML::BeginSeq;
  for (const auto& g : cfg.gateways) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << g.name;
    out << YAML::Key << "role" << YAML::Value << std::string(to_string(g.role));
    out << YAML::Key << "demod_paths" << YAML::Value << g.demod_paths;
    out << YAML::Key << "backhaul" << YAML::Value << format_duration(g.backhaul_delay);
    out << YAML::Key << "preemption" << YAML::Value << std::string(to_string(g.preemption));
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "devices" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : cfg.devices) {
    const auto& c = d.radio;
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << c.name;
    out << YAML::Key << "cluster" << YAML::Value << c.cluster;
    out << YAML::Key << "rp_period" << YAML::Value << format_duration(c.rp_period);
    out << YAML::Key << "clock_sigma" << YAML::Value << format_duration(c.clock_sigma);
    out << YAML::Key << "interarrival_floor" << YAML::Value << format_duration(c.interarrival_floor);
    out << YAML::Key << "sends_rp" << YAML::Value << (c.sends_rp ? "true" : "false");
    if (c.first_rp_offset) out << YAML::Key << "first_rp_offset" << YAML::Value << format_duration(*c.first_rp_offset);
    out << YAML::Key << "rp_subband" << YAML::Value << std::string(to_string(c.rp_subband));
    out << YAML::Key << "up_subband" << YAML::Value << std::string(to_string(c.up_subband));
    out << YAML::Key << "rp_sf" << YAML::Value << c.rp_sf;
    out << YAML::Key << "rp_phy_payload_bytes" << YAML::Value << c.rp_phy_payload;
    out << YAML::Key << "up_app_payload_bytes" << YAML::Value << c.up_app_payload;
    if (c.initial_assignment) {
      out << YAML::Key << "initial_assignment" << YAML::Value << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "channel" << YAML::Value << format_frequency(c.initial_assignment->channel);
      out << YAML::Key << "sf" << YAML::Value << c.initial_assignment->sf;
      out << YAML::EndMap;
    }
    out << YAML::Key << "receive_delay1" << YAML::Value << format_duration(c.receive_delay1);
    out << YAML::Key << "receive_delay2" << YAML::Value << format_duration(c.receive_delay2);
    out << YAML::Key << "rx_power" << YAML::Value << shortest(c.rx_power_dbm) + " dBm";
    if (!d.gateways.empty()) {
      out << YAML::Key << "gateways" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& g : d.gateways) out << g;
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "clusters" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : cfg.clusters) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << c.name;
    out << YAML::Key << "members" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& m : c.members) out << m;
    out << YAML::EndSeq;
    out << YAML::Key << "dcp_gateway" << YAML::Value << c.dcp_gateway;
    out << YAML::Key << "up_channels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto f : c.up_channels) out << format_frequency(f);
    out << YAML::EndSeq;
    out << YAML::Key << "single_sf" << YAML::Value << c.policy.single_sf;
    out << YAML::Key << "stack_sfs" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int sf : c.policy.stack_sfs) out << sf;
    out << YAML::EndSeq;
    if (!c.forced_assignments.empty()) {
      out << YAML::Key << "forced_assignments" << YAML::Value << YAML::BeginMap;
      for (const auto& [dev, a] : c.forced_assignments) {
        out << YAML::Key << dev << YAML::Value << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "channel" << YAML::Value << format_frequency(a.channel);
        out << YAML::Key << "sf" << YAML::Value << a.sf;
        out << YAML::EndMap;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  const auto& s = cfg.sensor;
  out << YAML::Key << "sensor" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "methane_sensitivity" << YAML::Value << shortest(s.methane_sensitivity_pct_per_volt) + " %/V";
  out << YAML::Key << "propane_butane_relative" << YAML::Value << shortest(s.propane_butane_relative_sensitivity);
  out << YAML::Key << "alarm_voltage" << YAML::Value << shortest(s.catalytic_alarm_volts) + " V";
  out << YAML::Key << "co_max" << YAML::Value << shortest(s.co_max_ppm) + " ppm";
  out << YAML::Key << "co_resolution" << YAML::Value << shortest(s.co_resolution_ppm) + " ppm";
  out << YAML::Key << "co_alarm" << YAML::Value << shortest(s.co_alarm_ppm) + " ppm";
  out << YAML::Key << "o2_min" << YAML::Value << shortest(s.o2_min_pct) + " %";
  out << YAML::Key << "o2_max" << YAML::Value << shortest(s.o2_max_pct) + " %";
  out << YAML::Key << "o2_resolution" << YAML::Value << shortest(s.o2_resolution_pct) + " %";
  out << YAML::Key << "o2_deficiency" << YAML::Value << shortest(s.o2_deficiency_pct) + " %";
  out << YAML::EndMap;

  auto level_text = [](sensor::Species sp, double level) {
    const std::string unit = sensor::is_combustible(sp) ? "%vol" : (sp == sensor::Species::co ? "ppm" : "%");
    return shortest(level) + " " + unit;
  };
  out << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : cfg.events) {
    out << YAML::BeginMap;
    if (e.periodic) {
      const auto& p = *e.periodic;
      out << YAML::Key << "periodic" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "scope" << YAML::Value << p.scope;
      out << YAML::Key << "interval" << YAML::Value << YAML::Flow << YAML::BeginSeq << format_duration(p.min_interval)
          << format_duration(p.max_interval) << YAML::EndSeq;
      out << YAML::Key << "species" << YAML::Value << std::string(to_string(p.species));
      out << YAML::Key << "level" << YAML::Value << level_text(p.species, p.level);
      if (p.first_at) out << YAML::Key << "first_at" << YAML::Value << format_duration(*p.first_at);
      out << YAML::EndMap;
    } else {
      out << YAML::Key << "script" << YAML::Value << YAML::BeginSeq;
      for (const auto& g : e.script) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "at" << YAML::Value << format_time(g.at);
        out << YAML::Key << "scope" << YAML::Value << g.scope;
        out << YAML::Key << "species" << YAML::Value << std::string(to_string(g.species));
        out << YAML::Key << "level" << YAML::Value << level_text(g.species, g.level);
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (cfg.outputs.json || cfg.outputs.csv) {
    out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
    if (cfg.outputs.json) out << YAML::Key << "json" << YAML::Value << *cfg.outputs.json;
    if (cfg.outputs.csv) out << YAML::Key << "csv" << YAML::Value << *cfg.outputs.csv;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string scenario_digest(const ScenarioConfig& cfg) {
  const std::uint64_t h = detail::fnv1a64(serialize_scenario(cfg));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lorafmar::sim
