#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lorafmar/core/cause.hpp"
#include "lorafmar/metrics/stats.hpp"
#include "lorafmar/phy/transmission.hpp"
#include "lorafmar/server/network_server.hpp"

namespace lorafmar::metrics {

inline constexpr const char* kReportSchemaId = "lorafmar.run-report/1";

// Uplink accounting for one packet kind. `losses` is keyed by the
// system-level cause; every generated packet is delivered or lost exactly
// once. RP deferrals count postponed starts and are informational.
struct KindCounters {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::map<Cause, std::uint64_t> losses;
  std::uint64_t deferrals = 0;

  std::uint64_t lost() const {
    std::uint64_t n = 0;
    for (const auto& [c, k] : losses) n += k;
    return n;
  }
  bool conserved() const { return generated == delivered + lost(); }

  void merge(const KindCounters& o) {
    generated += o.generated;
    delivered += o.delivered;
    deferrals += o.deferrals;
    for (const auto& [c, k] : o.losses) losses[c] += k;
  }
};

struct DcpCounters {
  std::uint64_t scheduled = 0;
  std::uint64_t sent_rx1 = 0;
  std::uint64_t sent_rx2 = 0;
  std::uint64_t received = 0;  // applied by the target device
  std::uint64_t rejected = 0;  // malformed assignment
  std::map<Cause, std::uint64_t> skipped;

  void merge(const DcpCounters& o) {
    scheduled += o.scheduled;
    sent_rx1 += o.sent_rx1;
    sent_rx2 += o.sent_rx2;
    received += o.received;
    rejected += o.rejected;
    for (const auto& [c, k] : o.skipped) skipped[c] += k;
  }
};

struct DeviceCounters {
  std::uint64_t up_generated = 0;
  std::uint64_t up_delivered = 0;
  std::uint64_t rp_generated = 0;
  std::uint64_t rp_delivered = 0;
  std::uint64_t dcp_received = 0;

  void merge(const DeviceCounters& o) {
    up_generated += o.up_generated;
    up_delivered += o.up_delivered;
    rp_generated += o.rp_generated;
    rp_delivered += o.rp_delivered;
    dcp_received += o.dcp_received;
  }
};

// Per-gateway verdicts for every uplink the gateway heard.
struct GatewayCounters {
  std::string role;
  std::map<phy::PacketKind, std::map<Cause, std::uint64_t>> outcomes;
  std::uint64_t downlinks_sent = 0;

  void merge(const GatewayCounters& o) {
    downlinks_sent += o.downlinks_sent;
    for (const auto& [k, m] : o.outcomes)
      for (const auto& [c, n] : m) outcomes[k][c] += n;
  }
};

// Alarm events that triggered UPs on two or more devices at once.
struct BurstCounters {
  std::uint64_t bursts = 0;
  std::uint64_t all_lost = 0;
  std::uint64_t any_lost = 0;

  void merge(const BurstCounters& o) {
    bursts += o.bursts;
    all_lost += o.all_lost;
    any_lost += o.any_lost;
  }
};

struct RunReport {
  std::string scenario_name;
  std::string scenario_digest;
  std::uint64_t seed = 0;
  int replications = 1;
  double sim_time_s = 0;
  std::uint64_t alarm_events = 0;

  KindCounters up;
  KindCounters rp;
  DcpCounters dcp;
  std::map<std::string, DeviceCounters> devices;
  std::map<std::string, GatewayCounters> gateways;
  BurstCounters bursts;

  std::vector<Duration> up_latencies;  // trigger -> server, delivered UPs
  Duration up_airtime_total = Duration::zero();
  std::uint64_t up_transmitted = 0;
  std::uint64_t latency_over_budget = 0;  // delivered UPs above 500 ms + backhaul

  std::map<std::string, server::AssignmentTable> assignments;

  bool conserved() const { return up.conserved() && rp.conserved(); }

  void merge(const RunReport& o) {
    replications += o.replications;
    sim_time_s += o.sim_time_s;
    alarm_events += o.alarm_events;
    up.merge(o.up);
    rp.merge(o.rp);
    dcp.merge(o.dcp);
    for (const auto& [k, v] : o.devices) devices[k].merge(v);
    for (const auto& [k, v] : o.gateways) {
      gateways[k].role = v.role;
      gateways[k].merge(v);
    }
    bursts.merge(o.bursts);
    up_latencies.insert(up_latencies.end(), o.up_latencies.begin(), o.up_latencies.end());
    up_airtime_total += o.up_airtime_total;
    up_transmitted += o.up_transmitted;
    latency_over_budget += o.latency_over_budget;
  }
};

namespace detail {

inline nlohmann::ordered_json causes_json(const std::map<Cause, std::uint64_t>& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (Cause c : kAllCauses)
    if (auto it = m.find(c); it != m.end() && it->second > 0) j[std::string(to_string(c))] = it->second;
  return j;
}

inline nlohmann::ordered_json kind_json(const KindCounters& k, bool with_deferrals) {
  nlohmann::ordered_json j;
  j["generated"] = k.generated;
  j["delivered"] = k.delivered;
  j["lost"] = k.lost();
  if (k.generated > 0) {
    const auto e = plr(k.delivered, k.generated);
    j["plr"] = e.estimate;
    j["ci95"] = {e.ci95.lo, e.ci95.hi};
  } else {
    j["plr"] = nullptr;
    j["ci95"] = nullptr;
  }
  j["losses"] = causes_json(k.losses);
  if (with_deferrals) j["deferrals"] = k.deferrals;
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const RunReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema"] = kReportSchemaId;
  j["scenario"] = {{"name", r.scenario_name}, {"digest", r.scenario_digest}};
  j["seed"] = r.seed;
  j["replications"] = r.replications;
  j["sim_time_s"] = r.sim_time_s;
  j["alarm_events"] = r.alarm_events;

  ordered_json kinds;
  kinds["UP"] = detail::kind_json(r.up, false);
  kinds["RP"] = detail::kind_json(r.rp, true);
  ordered_json dcp;
  dcp["scheduled"] = r.dcp.scheduled;
  dcp["sent_rx1"] = r.dcp.sent_rx1;
  dcp["sent_rx2"] = r.dcp.sent_rx2;
  dcp["received"] = r.dcp.received;
  dcp["rejected"] = r.dcp.rejected;
  dcp["skipped"] = detail::causes_json(r.dcp.skipped);
  kinds["DCP"] = dcp;
  j["kinds"] = kinds;

  const auto lat = summarize_latency(r.up_latencies);
  ordered_json l;
  l["count"] = lat.count;
  l["p50_ms"] = lat.p50.to_ms();
  l["p95_ms"] = lat.p95.to_ms();
  l["p99_ms"] = lat.p99.to_ms();
  l["max_ms"] = lat.max.to_ms();
  l["mean_airtime_ms"] = r.up_transmitted ? r.up_airtime_total.to_ms() / static_cast<double>(r.up_transmitted) : 0.0;
  l["over_budget"] = r.latency_over_budget;
  j["up_latency"] = l;

  ordered_json b;
  b["bursts"] = r.bursts.bursts;
  b["all_lost"] = r.bursts.all_lost;
  b["any_lost"] = r.bursts.any_lost;
  if (r.bursts.bursts > 0) {
    const auto ci = wilson_interval(r.bursts.all_lost, r.bursts.bursts);
    b["all_lost_rate"] = static_cast<double>(r.bursts.all_lost) / static_cast<double>(r.bursts.bursts);
    b["all_lost_ci95"] = {ci.lo, ci.hi};
  } else {
    b["all_lost_rate"] = nullptr;
    b["all_lost_ci95"] = nullptr;
  }
  j["bursts"] = b;

  ordered_json devs = ordered_json::object();
  for (const auto& [name, d] : r.devices) {
    ordered_json dj;
    dj["up_generated"] = d.up_generated;
    dj["up_delivered"] = d.up_delivered;
    if (d.up_generated)
      dj["up_plr"] = 1.0 - static_cast<double>(d.up_delivered) / static_cast<double>(d.up_generated);
    else
      dj["up_plr"] = nullptr;
    dj["rp_generated"] = d.rp_generated;
    dj["rp_delivered"] = d.rp_delivered;
    dj["dcp_received"] = d.dcp_received;
    devs[name] = dj;
  }
  j["devices"] = devs;

  ordered_json gws = ordered_json::object();
  for (const auto& [name, g] : r.gateways) {
    ordered_json gj;
    gj["role"] = g.role;
    gj["downlinks_sent"] = g.downlinks_sent;
    ordered_json per_kind = ordered_json::object();
    for (phy::PacketKind k : {phy::PacketKind::RP, phy::PacketKind::UP})
      if (auto it = g.outcomes.find(k); it != g.outcomes.end())
        per_kind[std::string(to_string(k))] = detail::causes_json(it->second);
    gj["outcomes"] = per_kind;
    gws[name] = gj;
  }
  j["gateways"] = gws;

  ordered_json asg = ordered_json::object();
  for (const auto& [cluster, table] : r.assignments) {
    ordered_json cj = ordered_json::object();
    for (const auto& [dev, a] : table) cj[dev] = {{"channel_mhz", a.channel.mhz()}, {"sf", a.sf}};
    asg[cluster] = cj;
  }
  j["assignments"] = asg;
  return j;
}

enum class Format { json, csv };

inline Format format_from_string(std::string_view s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  throw std::invalid_argument("unknown report format '" + std::string(s) + "'");
}

// CSV: one row per (kind, metric).
inline std::string to_csv(const RunReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "kind,metric,value\n";
  auto kind_rows = [&](std::string_view kind, const KindCounters& k) {
    os << kind << ",generated," << k.generated << '\n';
    os << kind << ",delivered," << k.delivered << '\n';
    if (k.generated > 0) {
      const auto e = plr(k.delivered, k.generated);
      os << kind << ",plr," << e.estimate << '\n';
      os << kind << ",ci95_lo," << e.ci95.lo << '\n';
      os << kind << ",ci95_hi," << e.ci95.hi << '\n';
    }
    for (Cause c : kAllCauses)
      if (auto it = k.losses.find(c); it != k.losses.end() && it->second > 0)
        os << kind << ",loss_" << to_string(c) << ',' << it->second << '\n';
  };
  kind_rows("UP", r.up);
  kind_rows("RP", r.rp);
  os << "RP,deferrals," << r.rp.deferrals << '\n';
  os << "DCP,scheduled," << r.dcp.scheduled << '\n';
  os << "DCP,sent_rx1," << r.dcp.sent_rx1 << '\n';
  os << "DCP,sent_rx2," << r.dcp.sent_rx2 << '\n';
  os << "DCP,received," << r.dcp.received << '\n';
  for (Cause c : kAllCauses)
    if (auto it = r.dcp.skipped.find(c); it != r.dcp.skipped.end() && it->second > 0)
      os << "DCP,skipped_" << to_string(c) << ',' << it->second << '\n';
  const auto lat = summarize_latency(r.up_latencies);
  os << "UP,latency_p50_ms," << lat.p50.to_ms() << '\n';
  os << "UP,latency_p95_ms," << lat.p95.to_ms() << '\n';
  os << "UP,latency_p99_ms," << lat.p99.to_ms() << '\n';
  os << "UP,latency_max_ms," << lat.max.to_ms() << '\n';
  os << "UP,latency_over_budget," << r.latency_over_budget << '\n';
  return os.str();
}

inline std::string emit_report(const RunReport& r, Format f) {
  if (f == Format::csv) return to_csv(r);
  return to_json(r).dump(2) + "\n";
}

inline void write_report(const std::string& path, const RunReport& r, Format f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open report destination '" + path + "' for writing");
  out << emit_report(r, f);
  if (!out.flush()) throw std::runtime_error("failed writing report to '" + path + "'");
}

}  // namespace lorafmar::metrics
