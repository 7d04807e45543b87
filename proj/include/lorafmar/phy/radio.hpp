#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "lorafmar/core/time.hpp"

namespace lorafmar::phy {

// LoRaWAN MAC overhead: MHDR 1 + FHDR 7 + FPort 1 + MIC 4.
inline constexpr int kMacOverheadBytes = 13;
inline constexpr int kUrgentAppPayloadBytes = 24;
inline constexpr int kUrgentPhyPayloadBytes = kUrgentAppPayloadBytes + kMacOverheadBytes;
inline constexpr int kDefaultDcpPhyPayloadBytes = 37;  // 82.176 ms at SF7/125 kHz
inline constexpr int kDefaultRpPhyPayloadBytes = 37;

inline constexpr Duration kUrgentLatencyBudget = Duration::milliseconds(500);

struct RadioParams {
  int sf = 7;
  int bandwidth_hz = 125000;
  int coding_rate = 1;  // 1..4 -> 4/5..4/8
  int preamble_symbols = 8;
  bool explicit_header = true;
  // Unset means automatic: on iff the symbol time exceeds 16 ms.
  std::optional<bool> low_data_rate_opt;

  double symbol_time_s() const { return std::ldexp(1.0, sf) / bandwidth_hz; }

  bool effective_ldro() const {
    return low_data_rate_opt.value_or(symbol_time_s() > 0.016);
  }

  void validate() const {
    if (sf < 7 || sf > 12) throw std::invalid_argument("spreading factor " + std::to_string(sf) + " outside 7..12");
    if (bandwidth_hz != 125000 && bandwidth_hz != 250000 && bandwidth_hz != 500000)
      throw std::invalid_argument("bandwidth " + std::to_string(bandwidth_hz) + " Hz not in {125k, 250k, 500k}");
    if (coding_rate < 1 || coding_rate > 4)
      throw std::invalid_argument("coding rate index " + std::to_string(coding_rate) + " outside 1..4");
    if (preamble_symbols < 0) throw std::invalid_argument("negative preamble length");
  }

  bool operator==(const RadioParams&) const = default;
};

inline RadioParams lora_params(int sf, int bandwidth_hz = 125000) {
  RadioParams p;
  p.sf = sf;
  p.bandwidth_hz = bandwidth_hz;
  return p;
}

struct AirtimeBreakdown {
  double symbol_time_s = 0;
  double preamble_symbols = 0;  // programmed preamble + 4.25
  int payload_symbols = 0;
  double preamble_s = 0;
  double payload_s = 0;
  Duration total;
};

// Standard Semtech SX127x time-on-air:
//   n_payload = 8 + max(ceil((8L - 4SF + 28 + 16 - 20IH) / (4(SF - 2DE))) (CR + 4), 0)
inline AirtimeBreakdown airtime_breakdown(const RadioParams& p, int phy_payload_len) {
  p.validate();
  if (phy_payload_len < 0) throw std::invalid_argument("negative PHY payload length");

  const int ih = p.explicit_header ? 0 : 1;
  const int de = p.effective_ldro() ? 1 : 0;
  const int numerator = 8 * phy_payload_len - 4 * p.sf + 28 + 16 - 20 * ih;
  const int denominator = 4 * (p.sf - 2 * de);
  // Integer ceil for a possibly negative numerator.
  int blocks = numerator / denominator;
  if (numerator % denominator != 0 && numerator > 0) ++blocks;

  AirtimeBreakdown b;
  b.symbol_time_s = p.symbol_time_s();
  b.preamble_symbols = p.preamble_symbols + 4.25;
  b.payload_symbols = 8 + std::max(blocks * (p.coding_rate + 4), 0);
  b.preamble_s = b.preamble_symbols * b.symbol_time_s;
  b.payload_s = b.payload_symbols * b.symbol_time_s;
  b.total = Duration::seconds(b.preamble_s + b.payload_s);
  return b;
}

inline Duration airtime(const RadioParams& p, int phy_payload_len) {
  return airtime_breakdown(p, phy_payload_len).total;
}

}  // namespace lorafmar::phy
