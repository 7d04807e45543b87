#include <gtest/gtest.h>

#include "lorafmar/phy/duty_cycle.hpp"
#include "lorafmar/phy/radio.hpp"

using namespace lorafmar;
using namespace lorafmar::phy;

namespace {
SimTime at_s(double s) { return SimTime::from_seconds(s); }
}  // namespace

TEST(DutyCycle, OffPeriodFormula) {
  DutyCycleLedger l(DutyCyclePolicy::off_period);
  const Duration t = Duration::from_ms(267.3);
  l.record("ED8", SubBandId::g, at_s(10), t);
  // end + t (1/d - 1) = 10.2673 + 0.2673 * 99
  EXPECT_EQ(l.next_allowed_time("ED8", SubBandId::g), at_s(10.2673) + Duration::seconds(26.4627));
  EXPECT_FALSE(l.check("ED8", SubBandId::g, at_s(36.7)).permitted);
  EXPECT_EQ(l.check("ED8", SubBandId::g, at_s(36.7)).blocked_until, at_s(36.73));
  EXPECT_TRUE(l.check("ED8", SubBandId::g, at_s(36.73)).permitted);
}

TEST(DutyCycle, TenPercentBand) {
  DutyCycleLedger l(DutyCyclePolicy::off_period);
  l.record("gw", SubBandId::g3, at_s(0), Duration::milliseconds(100));
  EXPECT_EQ(l.next_allowed_time("gw", SubBandId::g3) - at_s(0.1), Duration::seconds(0.9));
}

TEST(DutyCycle, SubBandsAreIndependent) {
  DutyCycleLedger l(DutyCyclePolicy::off_period);
  l.record("ED1", SubBandId::g, at_s(0), Duration::from_ms(267.264));
  EXPECT_FALSE(l.check("ED1", SubBandId::g, at_s(1)).permitted);
  EXPECT_TRUE(l.check("ED1", SubBandId::g1, at_s(1)).permitted);
  EXPECT_TRUE(l.check("ED2", SubBandId::g, at_s(1)).permitted);
  l.record("ED1", SubBandId::g1, at_s(1), Duration::from_ms(82.176));
  EXPECT_EQ(l.next_allowed_time("ED1", SubBandId::g), at_s(0.267264) + Duration::seconds(0.267264 * 99));
}

TEST(DutyCycle, RecordingABlockedTransmissionThrows) {
  DutyCycleLedger l(DutyCyclePolicy::off_period);
  l.record("ED1", SubBandId::g1, at_s(0), Duration::milliseconds(100));
  EXPECT_THROW(l.record("ED1", SubBandId::g1, at_s(1), Duration::milliseconds(100)), std::logic_error);
}

TEST(DutyCycle, SlidingWindowBudget) {
  DutyCycleLedger l(DutyCyclePolicy::sliding_window, Duration::seconds(100));  // 1 s budget on g1
  SimTime t = at_s(0);
  for (int i = 0; i < 10; ++i) {
    ASSERT_TRUE(l.check("gw", SubBandId::g1, t, Duration::milliseconds(100)).permitted) << i;
    l.record("gw", SubBandId::g1, t, Duration::milliseconds(100));
    t = t + Duration::milliseconds(200);
  }
  const auto v = l.check("gw", SubBandId::g1, t, Duration::milliseconds(100));
  ASSERT_FALSE(v.permitted);
  // The first record leaves the window once t - 100 s passes 0.1 s.
  EXPECT_EQ(v.blocked_until, at_s(100.1));
  EXPECT_TRUE(l.check("gw", SubBandId::g1, v.blocked_until, Duration::milliseconds(100)).permitted);
}

namespace {

// A transmitter that sends `air` whenever the ledger lets it; returns the
// busy fraction over the whole horizon and the worst window.
struct Saturation {
  double long_run = 0;
  double worst_window = 0;
};

Saturation saturate(DutyCyclePolicy policy, SubBandId band, Duration air, double horizon_s) {
  const Duration window = Duration::seconds(600);
  DutyCycleLedger l(policy, window);
  SimTime t = SimTime::zero();
  const SimTime end = at_s(horizon_s);
  while (t < end) {
    const auto v = l.check("tx", band, t, air);
    if (!v.permitted) {
      t = v.blocked_until;
      continue;
    }
    l.record("tx", band, t, air);
    t = t + air;
  }
  Saturation s;
  s.long_run = l.busy_time("tx", band, SimTime::zero(), end).to_seconds() / horizon_s;
  for (SimTime w = at_s(0); w + window <= end; w = w + Duration::seconds(7))
    s.worst_window = std::max(s.worst_window, l.busy_time("tx", band, w, w + window).to_seconds() / 600.0);
  return s;
}

}  // namespace

class SaturatingTransmitter : public ::testing::TestWithParam<std::tuple<DutyCyclePolicy, SubBandId, int>> {};

TEST_P(SaturatingTransmitter, NeverExceedsLimit) {
  const auto [policy, band, sf] = GetParam();
  const Duration air = airtime(lora_params(sf), 37);
  const auto s = saturate(policy, band, air, 7200);
  const double d = duty_cycle_limit(band);
  // The last admitted frame may end right before the horizon.
  EXPECT_LE(s.long_run, d + air.to_seconds() / 7200 + 1e-9);
  EXPECT_GT(s.long_run, 0.9 * d);
  if (policy == DutyCyclePolicy::sliding_window) {
    EXPECT_LE(s.worst_window, d + 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Bands, SaturatingTransmitter,
    ::testing::Combine(::testing::Values(DutyCyclePolicy::off_period, DutyCyclePolicy::sliding_window),
                       ::testing::Values(SubBandId::g, SubBandId::g1, SubBandId::g3), ::testing::Values(7, 9, 12)));

TEST(DutyCycle, PolicyNames) {
  EXPECT_EQ(duty_cycle_policy_from_string("off-period"), DutyCyclePolicy::off_period);
  EXPECT_EQ(duty_cycle_policy_from_string("sliding-window"), DutyCyclePolicy::sliding_window);
  EXPECT_THROW(duty_cycle_policy_from_string("none"), std::invalid_argument);
}
