#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lorafmar::phy {

// Carrier frequency in whole hertz.
struct Frequency {
  std::int64_t hz = 0;

  static constexpr Frequency from_hz(std::int64_t hz) { return Frequency{hz}; }
  static Frequency from_mhz(double mhz) { return Frequency{std::llround(mhz * 1e6)}; }
  double mhz() const { return static_cast<double>(hz) / 1e6; }

  auto operator<=>(const Frequency&) const = default;
};

enum class SubBandId { g, g1, g2, g3, g4 };

inline constexpr std::array<SubBandId, 5> kAllSubBands = {SubBandId::g, SubBandId::g1, SubBandId::g2,
                                                          SubBandId::g3, SubBandId::g4};

inline std::string_view to_string(SubBandId id) {
  switch (id) {
    case SubBandId::g: return "g";
    case SubBandId::g1: return "g1";
    case SubBandId::g2: return "g2";
    case SubBandId::g3: return "g3";
    case SubBandId::g4: return "g4";
  }
  return "?";
}

inline SubBandId subband_from_string(std::string_view s) {
  for (SubBandId id : kAllSubBands)
    if (to_string(id) == s) return id;
  throw std::invalid_argument("unknown sub-band '" + std::string(s) + "'");
}

// ETSI EN300.220 limits for the EU868 sub-bands. Fixed by regulation; not
// overridable from scenarios.
inline constexpr double duty_cycle_limit(SubBandId id) {
  switch (id) {
    case SubBandId::g: return 0.01;
    case SubBandId::g1: return 0.01;
    case SubBandId::g2: return 0.001;
    case SubBandId::g3: return 0.10;
    case SubBandId::g4: return 0.01;
  }
  return 0.0;
}

struct SubBand {
  SubBandId id = SubBandId::g;
  Frequency lo;  // inclusive
  Frequency hi;  // exclusive, except g4 whose upper edge 870.0 MHz is inclusive
  double duty_cycle_limit = 0.0;
  std::vector<Frequency> channels;

  std::string_view name() const { return to_string(id); }
  bool contains(Frequency f) const {
    return f >= lo && (f < hi || (id == SubBandId::g4 && f == hi));
  }
};

// EU868 plan split into duty-cycle sub-bands. Channel lists may be
// overridden; sub-band edges and limits may not.
class ChannelPlan {
 public:
  static ChannelPlan eu868() {
    ChannelPlan plan;
    auto mhz = Frequency::from_mhz;
    plan.bands_ = {
        SubBand{SubBandId::g, mhz(863.0), mhz(868.0), 0.01,
                {mhz(867.1), mhz(867.3), mhz(867.5), mhz(867.7), mhz(867.9)}},
        SubBand{SubBandId::g1, mhz(868.0), mhz(868.6), 0.01, {mhz(868.1), mhz(868.3), mhz(868.5)}},
        SubBand{SubBandId::g2, mhz(868.7), mhz(869.2), 0.001, {}},
        SubBand{SubBandId::g3, mhz(869.4), mhz(869.65), 0.10, {mhz(869.525)}},
        SubBand{SubBandId::g4, mhz(869.7), mhz(870.0), 0.01, {}},
    };
    plan.rx2_channel_ = mhz(869.525);
    return plan;
  }

  const SubBand& band(SubBandId id) const { return bands_[static_cast<std::size_t>(id)]; }
  const std::vector<SubBand>& bands() const { return bands_; }

  std::optional<SubBandId> find_subband(Frequency f) const {
    for (const auto& b : bands_)
      if (b.contains(f)) return b.id;
    return std::nullopt;
  }

  // Throws for frequencies in the gaps between sub-bands or outside 863-870 MHz.
  const SubBand& subband_of(Frequency f) const {
    auto id = find_subband(f);
    if (!id) throw std::invalid_argument("frequency " + std::to_string(f.mhz()) + " MHz is outside the channel plan");
    return band(*id);
  }

  void set_channels(SubBandId id, std::vector<Frequency> channels) {
    auto& b = bands_[static_cast<std::size_t>(id)];
    for (auto f : channels)
      if (!b.contains(f))
        throw std::invalid_argument("channel " + std::to_string(f.mhz()) + " MHz is not inside sub-band " +
                                    std::string(b.name()));
    b.channels = std::move(channels);
  }

  Frequency rx2_channel() const { return rx2_channel_; }
  void set_rx2_channel(Frequency f) {
    subband_of(f);
    rx2_channel_ = f;
  }

  bool is_channel_of(SubBandId id, Frequency f) const {
    for (auto c : band(id).channels)
      if (c == f) return true;
    return false;
  }

 private:
  std::vector<SubBand> bands_;
  Frequency rx2_channel_;
};

}  // namespace lorafmar::phy
