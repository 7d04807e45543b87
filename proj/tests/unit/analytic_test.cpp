#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lorafmar/analytic/plr_model.hpp"

using namespace lorafmar;
using namespace lorafmar::analytic;

namespace {

constexpr double kTau = 0.082176, kD = 0.267264;

double q(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi); }

// Independent closed form: the antiderivative of Q(z) is z Q(z) - phi(z).
double survival_integral_oracle(double upper, double T, double sigma) {
  auto G = [](double z) { return z * q(z) - phi(z); };
  return sigma * (G((upper - T) / sigma) - G(-T / sigma));
}

PlrModelParams test2_params(int n = 8, double sigma = 0.05) {
  PlrModelParams p;
  p.devices = n;
  p.period_s = 70;
  p.sigma_s = sigma;
  p.dcp_airtime = AirtimeMix::point(kTau);
  p.up_airtime = AirtimeMix::point(kD);
  return p;
}

}  // namespace

TEST(Analytic, ApproxMatchesPaperPrediction) {
  const auto r = plr_approx(8, 0.0822, 0.2673, 70);
  EXPECT_NEAR(r.plr, 8 * 0.3495 / 70, 1e-15);
  EXPECT_GE(r.plr, 0.039);
  EXPECT_LE(r.plr, 0.040);
}

TEST(Analytic, ExactValueForTest2) {
  const std::vector<double> taus(8, 0.0822);
  const auto r = plr_exact_fixed(taus, 0.2673, 70, 0.05);
  EXPECT_NEAR(r.plr, 1 - std::pow(1 - 0.3495 / 70, 8), 1e-12);
  EXPECT_NEAR(r.plr, 0.039252, 5e-7);
  EXPECT_NEAR(r.plr / plr_approx(8, 0.0822, 0.2673, 70).plr, 1.0, 0.02);
}

TEST(Analytic, SurvivalIntegralAgainstClosedForm) {
  for (double sigma : {0.05, 0.5, 3.0, 7.0})
    for (double upper : {0.35, 10.0, 60.0, 69.0, 70.0, 72.0, 90.0})
      EXPECT_NEAR(survival_integral(upper, 70, sigma), survival_integral_oracle(upper, 70, sigma), 1e-8)
          << sigma << " " << upper;
}

TEST(Analytic, ResidualDensityIntegratesToOne) {
  // int_0^inf (1 - F_r) = E[r] = T when P(r < 0) is negligible.
  EXPECT_NEAR(survival_integral(200, 70, 2.0) / 70, 1.0, 1e-9);
  EXPECT_NEAR(residual_density(0, 70, 0.05), 1.0 / 70, 1e-15);
  EXPECT_THROW(residual_density(-1, 70, 0.05), std::invalid_argument);
}

TEST(Analytic, EmptyProduct) {
  for (auto m : {Method::exact_fixed, Method::marginal, Method::approx}) {
    const auto r = evaluate(test2_params(0), m);
    EXPECT_EQ(r.plr, 0.0) << to_string(m);
  }
}

TEST(Analytic, SigmaZeroClosedForm) {
  for (int n : {1, 2, 8, 30}) {
    const auto r = evaluate(test2_params(n, 0.0), Method::exact_fixed);
    EXPECT_NEAR(r.p_collision_free, std::pow(1 - (kTau + kD) / 70, n), 1e-10);
  }
}

TEST(Analytic, ApproxWithinOnePercentInSmallPlrRegime) {
  for (int n = 1; n <= 8; ++n)
    for (double T : {70.0, 140.0, 300.0, 600.0}) {
      auto p = test2_params(n);
      p.period_s = T;
      const double approx = evaluate(p, Method::approx).plr;
      if (approx > 0.02) continue;
      const double exact = evaluate(p, Method::exact_fixed).plr;
      EXPECT_LT(std::abs(approx - exact) / exact, 0.01) << n << " " << T;
    }
}

TEST(Analytic, MarginalWithPointMassesEqualsExact) {
  for (double sigma : {0.0, 0.05, 0.5})
    for (int n : {1, 4, 8}) {
      const auto p = test2_params(n, sigma);
      EXPECT_NEAR(evaluate(p, Method::marginal).plr, evaluate(p, Method::exact_fixed).plr, 1e-6);
    }
}

TEST(Analytic, MarginalMixture) {
  auto p = test2_params(8);
  p.up_airtime = AirtimeMix{{{0.267264, 0.5}, {0.143872, 0.5}}};
  const double mixed = evaluate(p, Method::marginal).plr;
  auto lo = test2_params(8), hi = test2_params(8);
  lo.up_airtime = AirtimeMix::point(0.143872);
  EXPECT_GT(mixed, evaluate(lo, Method::marginal).plr);
  EXPECT_LT(mixed, evaluate(hi, Method::marginal).plr);
}

TEST(Analytic, SigmaInsensitivity) {
  const double base = evaluate(test2_params(8, 0.0), Method::exact_fixed).plr;
  for (double sigma : {0.05, 0.5, 0.7}) {
    const double v = evaluate(test2_params(8, sigma), Method::exact_fixed).plr;
    EXPECT_LT(std::abs(v - base) / base, 1e-3) << sigma;
  }
}

TEST(Analytic, HeterogeneousAirtimes) {
  const std::vector<double> taus{0.082176, 0.143872};
  const double expected = 1 - (1 - (0.082176 + kD) / 70) * (1 - (0.143872 + kD) / 70);
  EXPECT_NEAR(plr_exact_fixed(taus, kD, 70, 0.0).plr, expected, 1e-12);
}

TEST(Analytic, RegimeGuard) {
  EXPECT_TRUE(within_regime(0.35, 70, 0.05));
  EXPECT_FALSE(within_regime(0.35, 1.0, 0.2));
  auto p = test2_params(8, 0.2);
  p.period_s = 1.0;
  EXPECT_THROW(evaluate(p, Method::exact_fixed), ModelRegimeError);
  EXPECT_THROW(evaluate(p, Method::marginal), ModelRegimeError);
  EXPECT_FALSE(evaluate(p, Method::approx).in_regime);
}

TEST(Analytic, InputValidation) {
  EXPECT_THROW(evaluate(test2_params(-1), Method::approx), std::invalid_argument);
  auto p = test2_params(8);
  p.up_airtime = AirtimeMix{{{0.2, 0.5}, {0.3, 0.4}}};
  EXPECT_THROW(evaluate(p, Method::marginal), std::invalid_argument);
  EXPECT_THROW(method_from_string("exactish"), std::invalid_argument);
  EXPECT_EQ(method_from_string("exact"), Method::exact_fixed);
}

TEST(Analytic, MonotoneInDevices) {
  double prev = 0;
  for (int n = 1; n <= 20; ++n) {
    const double v = evaluate(test2_params(n), Method::exact_fixed).plr;
    EXPECT_GT(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
}
