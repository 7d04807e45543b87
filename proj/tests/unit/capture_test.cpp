#include <gtest/gtest.h>

#include <cmath>

#include "lorafmar/metrics/stats.hpp"
#include "lorafmar/phy/capture.hpp"

using namespace lorafmar;
using namespace lorafmar::phy;

namespace {

Transmission tx(std::uint64_t id, int sf, double start_s, double power = -90, double mhz = 867.1) {
  auto t = make_transmission(id, "d" + std::to_string(id), PacketKind::UP, Frequency::from_mhz(mhz), lora_params(sf),
                             SimTime::from_seconds(start_s), 37);
  t.rx_power_dbm = power;
  return t;
}

struct PairRates {
  double a = 0, b = 0, both = 0;
  std::uint64_t n = 0, la = 0, lb = 0, lboth = 0;
};

PairRates simulate_pairs(const CaptureModel& m, int sf_a, int sf_b, double pa, double pb, int n) {
  // One stream per SF pair, so rows of the table are independent checks.
  auto rng = RandomStream::derive(99, "capture/" + std::to_string(sf_a) + "-" + std::to_string(sf_b) + "/" +
                                          std::to_string(pa) + "/" + std::to_string(pb));
  PairDraws draws;
  PairRates r;
  r.n = n;
  for (int i = 0; i < n; ++i) {
    const auto a = tx(2 * i + 1, sf_a, i * 10.0, pa);
    const auto b = tx(2 * i + 2, sf_b, i * 10.0, pb);
    const Transmission* ia[] = {&b};
    const Transmission* ib[] = {&a};
    const bool sa = survives(a, ia, m, rng, &draws);
    const bool sb = survives(b, ib, m, rng, &draws);
    r.la += !sa;
    r.lb += !sb;
    r.lboth += !sa && !sb;
  }
  r.a = double(r.la) / n;
  r.b = double(r.lb) / n;
  r.both = double(r.lboth) / n;
  EXPECT_EQ(draws.size(), 0u);
  return r;
}

}  // namespace

TEST(Capture, MeasuredTable) {
  const auto t = measured_pair_losses();
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(t[0], (PairLossObservation{7, 7, 0.943, 0.35, 0.2966}));
  EXPECT_EQ(t[1], (PairLossObservation{7, 8, 0.047, 0.0323, 0.0012}));
}

TEST(Capture, IndependentFitKeepsJointLoss) {
  for (const auto& o : measured_pair_losses()) {
    const auto s = fit_independent_survival(o);
    EXPECT_NEAR((1 - s.a_vs_b) * (1 - s.b_vs_a), o.loss_both, 1e-12) << o.sf_a << "/" << o.sf_b;
  }
  const auto s77 = fit_independent_survival(measured_pair_losses()[0]);
  EXPECT_NEAR(s77.a_vs_b, 1 - std::sqrt(0.2966), 1e-12);
  EXPECT_NEAR(s77.a_vs_b, 0.45539, 1e-5);
}

TEST(Capture, UnlistedPairsFallBack) {
  const auto m = CaptureModel::fitted_defaults();
  EXPECT_DOUBLE_EQ(m.survival_probability(11, 11), 0.0);
  EXPECT_DOUBLE_EQ(m.survival_probability(7, 12), 1.0);
  EXPECT_DOUBLE_EQ(m.survival_probability(9, 8), 1.0);
  EXPECT_NEAR(m.survival_probability(8, 9), 0.68, 1e-12);
}

TEST(Capture, CoupledPairsReproduceTheTable) {
  const auto m = CaptureModel::fitted_defaults();
  const int n = 400000;
  // Fifteen cells checked at once: Bonferroni keeps the family at 95%.
  const double z = 2.94;
  for (const auto& o : measured_pair_losses()) {
    // Same-SF rows: the first-listed party is the weaker one when its loss is larger.
    double pa = -90, pb = -90;
    if (o.sf_a == o.sf_b) (o.loss_a > o.loss_b ? pa : pb) = -95;
    const auto r = simulate_pairs(m, o.sf_a, o.sf_b, pa, pb, n);
    EXPECT_TRUE(metrics::wilson_interval(r.la, r.n, z).contains(o.loss_a)) << o.sf_a << "/" << o.sf_b << " a " << r.a;
    EXPECT_TRUE(metrics::wilson_interval(r.lb, r.n, z).contains(o.loss_b)) << o.sf_a << "/" << o.sf_b << " b " << r.b;
    EXPECT_TRUE(metrics::wilson_interval(r.lboth, r.n, z).contains(o.loss_both))
        << o.sf_a << "/" << o.sf_b << " both " << r.both;
  }
}

TEST(Capture, EqualPowerSameSfIsSymmetric) {
  const auto m = CaptureModel::fitted_defaults();
  const auto r = simulate_pairs(m, 7, 7, -90, -90, 400000);
  const double mean = (0.943 + 0.35) / 2;
  EXPECT_TRUE(metrics::wilson_interval(r.la, r.n).contains(mean));
  EXPECT_TRUE(metrics::wilson_interval(r.lb, r.n).contains(mean));
  EXPECT_TRUE(metrics::wilson_interval(r.lboth, r.n).contains(0.2966));
}

TEST(Capture, ThresholdMode) {
  CaptureModel m;
  m.mode = CaptureMode::threshold;
  auto rng = RandomStream::derive(1, "c");
  const auto strong = tx(1, 7, 0, -80), weak = tx(2, 7, 0, -90), other_sf = tx(3, 9, 0, -100);
  const Transmission* w[] = {&weak};
  const Transmission* s[] = {&strong};
  EXPECT_TRUE(survives(strong, w, m, rng));   // 10 dB >= 6 dB margin
  EXPECT_FALSE(survives(weak, s, m, rng));
  const Transmission* o[] = {&other_sf};
  EXPECT_TRUE(survives(strong, o, m, rng));   // other SF, weaker
  const auto loud_sf9 = tx(4, 9, 0, -60);
  const Transmission* l[] = {&loud_sf9};
  EXPECT_FALSE(survives(weak, l, m, rng));    // 30 dB above: isolation exceeded
}

TEST(Capture, NoInterferersAlwaysDecoded) {
  const auto m = CaptureModel::fitted_defaults();
  auto rng = RandomStream::derive(1, "c");
  const auto a = tx(1, 7, 0);
  EXPECT_TRUE(survives(a, {}, m, rng));
}

TEST(Capture, ResolveUsesOnlySameChannelOverlaps) {
  const auto m = CaptureModel::fitted_defaults();
  auto rng = RandomStream::derive(1, "c");
  std::vector<Transmission> v{tx(1, 7, 0), tx(2, 7, 0, -90, 867.3), tx(3, 7, 5)};
  const auto r = resolve_receptions(v, m, rng);
  EXPECT_TRUE(r.at(1));
  EXPECT_TRUE(r.at(2));
  EXPECT_TRUE(r.at(3));
}

TEST(Capture, InvalidObservationRejected) {
  CaptureModel m;
  m.add_observation({7, 7, 0.1, 0.1, 0.5});
  EXPECT_THROW(m.validate(), std::invalid_argument);
}
