#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lorafmar/core/time.hpp"
#include "lorafmar/phy/channel_plan.hpp"
#include "lorafmar/phy/radio.hpp"

namespace lorafmar::phy {

enum class PacketKind { RP, UP, DCP };

inline std::string_view to_string(PacketKind k) {
  switch (k) {
    case PacketKind::RP: return "RP";
    case PacketKind::UP: return "UP";
    case PacketKind::DCP: return "DCP";
  }
  return "?";
}

// One frame on air.
struct Transmission {
  std::uint64_t id = 0;
  std::string source;  // device or gateway name
  PacketKind kind = PacketKind::RP;
  Frequency channel;
  RadioParams params;
  SimTime start;
  Duration airtime;
  int phy_payload_len = 0;
  double rx_power_dbm = -90.0;  // configured receive power at the gateways

  SimTime end() const { return start + airtime; }

  bool overlaps(const Transmission& o) const { return start < o.end() && o.start < end(); }
};

inline Transmission make_transmission(std::uint64_t id, std::string source, PacketKind kind, Frequency channel,
                                      const RadioParams& params, SimTime start, int phy_payload_len) {
  Transmission t;
  t.id = id;
  t.source = std::move(source);
  t.kind = kind;
  t.channel = channel;
  t.params = params;
  t.start = start;
  t.phy_payload_len = phy_payload_len;
  t.airtime = airtime(params, phy_payload_len);
  return t;
}

}  // namespace lorafmar::phy
