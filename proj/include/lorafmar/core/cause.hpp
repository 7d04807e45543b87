#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lorafmar {

// Per-packet outcome at one gateway (or at the device, for the last three).
enum class Cause {
  decoded,
  collision,
  gw_preempted,
  tx_busy,
  no_demod_path,
  duty_cycle,
  unassigned,
  rx_only,
};

inline constexpr std::array<Cause, 8> kAllCauses = {Cause::decoded,       Cause::collision,  Cause::gw_preempted,
                                                    Cause::tx_busy,       Cause::no_demod_path, Cause::duty_cycle,
                                                    Cause::unassigned,    Cause::rx_only};

inline std::string_view to_string(Cause c) {
  switch (c) {
    case Cause::decoded: return "decoded";
    case Cause::collision: return "collision";
    case Cause::gw_preempted: return "gw-preempted";
    case Cause::tx_busy: return "tx-busy";
    case Cause::no_demod_path: return "no-demod-path";
    case Cause::duty_cycle: return "duty-cycle";
    case Cause::unassigned: return "unassigned";
    case Cause::rx_only: return "rx-only";
  }
  return "?";
}

inline Cause cause_from_string(std::string_view s) {
  for (Cause c : kAllCauses)
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown cause '" + std::string(s) + "'");
}

}  // namespace lorafmar
