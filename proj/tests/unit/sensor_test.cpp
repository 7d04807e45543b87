#include <gtest/gtest.h>

#include "lorafmar/sensor/gas_sensor.hpp"

using namespace lorafmar;
using namespace lorafmar::sensor;

namespace {
GasEvent ev(Species s, double level) { return {SimTime::zero(), "c", s, level}; }
}  // namespace

TEST(Sensor, BridgeVoltageAtLowerExplosiveLimits) {
  const SensorProfile p;
  EXPECT_NEAR(bridge_voltage(p, Species::methane, 5.0), 2.5, 1e-12);
  EXPECT_NEAR(bridge_voltage(p, Species::butane, 1.8), 0.6, 1e-12);
  EXPECT_NEAR(bridge_voltage(p, Species::propane, 2.1), 0.7, 1e-12);
}

TEST(Sensor, AlarmFiresBelowEveryLel) {
  const SensorProfile p;
  for (auto s : {Species::methane, Species::propane, Species::butane}) {
    const double trip = p.catalytic_alarm_volts * p.sensitivity(s);
    EXPECT_LT(trip, lower_explosive_limit(s)) << to_string(s);
    EXPECT_TRUE(alarm_check(p, ev(s, trip)).alarm);
    EXPECT_FALSE(alarm_check(p, ev(s, trip * 0.999)).alarm);
  }
  EXPECT_NEAR(p.catalytic_alarm_volts * p.sensitivity(Species::methane), 1.0, 1e-12);
  EXPECT_NEAR(p.catalytic_alarm_volts * p.sensitivity(Species::propane), 1.5, 1e-12);
}

TEST(Sensor, CoQuantizedAndClamped) {
  const SensorProfile p;
  auto d = alarm_check(p, ev(Species::co, 99.2));
  EXPECT_DOUBLE_EQ(d.reading, 100.0);
  EXPECT_TRUE(d.alarm);
  d = alarm_check(p, ev(Species::co, 98.8));
  EXPECT_DOUBLE_EQ(d.reading, 98.0);
  EXPECT_FALSE(d.alarm);
  d = alarm_check(p, ev(Species::co, 800));
  EXPECT_TRUE(d.clamped);
  EXPECT_DOUBLE_EQ(d.reading, 500.0);
}

TEST(Sensor, OxygenDeficiency) {
  const SensorProfile p;
  EXPECT_FALSE(alarm_check(p, ev(Species::o2, 20.9)).alarm);
  EXPECT_TRUE(alarm_check(p, ev(Species::o2, 19.0)).alarm);
  const auto d = alarm_check(p, ev(Species::o2, 12.0));
  EXPECT_TRUE(d.clamped);
  EXPECT_DOUBLE_EQ(d.reading, 15.0);
  EXPECT_TRUE(d.alarm);
}

TEST(Sensor, InvalidInputs) {
  const SensorProfile p;
  EXPECT_THROW(bridge_voltage(p, Species::co, 10), std::invalid_argument);
  EXPECT_THROW(alarm_check(p, ev(Species::methane, -1)), std::invalid_argument);
  EXPECT_THROW(species_from_string("hydrogen"), std::invalid_argument);
  SensorProfile bad;
  bad.co_alarm_ppm = 900;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Sensor, PeriodicGeneratorStaysInInterval) {
  EventSource src;
  src.periodic = EventSource::Periodic{"alarm"};
  EventGenerator gen(src, RandomStream::derive(1, "events/0"));
  SimTime prev = SimTime::zero();
  for (int i = 0; i < 1000; ++i) {
    const auto e = gen.next();
    ASSERT_TRUE(e);
    const double gap = (e->at - prev).to_seconds();
    EXPECT_GE(gap, 120.0);
    EXPECT_LE(gap, 130.0);
    prev = e->at;
  }
}

TEST(Sensor, ScriptedGeneratorEnds) {
  EventSource src;
  src.scripted = EventSource::Scripted{{ev(Species::methane, 3)}};
  EventGenerator gen(src, RandomStream::derive(1, "events/0"));
  EXPECT_TRUE(gen.next());
  EXPECT_FALSE(gen.next());
}
