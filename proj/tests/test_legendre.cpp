#include <gtest/gtest.h>

#include <cmath>

#include "lossdev/legendre.hpp"
#include "oracles.hpp"

using namespace lossdev;

namespace {

LossClass coin(double a) { return LossClass::make("pm", {-a, a}, {0.5, 0.5}); }

PortfolioModel pure(double a) { return PortfolioModel::weighted({coin(a)}, {1.0}); }

// Independent reference: the rate of a fair +-1 coin from the entropy form
// log 2 + p log p + q log q with p = (1+x)/2.
double coin_entropy_rate(double x) {
  const double p = (1 + x) / 2;
  const double q = 1 - p;
  auto xlogx = [](double t) { return t > 0 ? t * std::log(t) : 0.0; };
  return std::log(2.0) + xlogx(p) + xlogx(q);
}

}  // namespace

TEST(Legendre, TanhPoint) {
  const auto r = legendre_transform(pure(1), std::tanh(1.0));
  EXPECT_EQ(r.status, RateStatus::interior);
  EXPECT_NEAR(r.lambda_star, 1.0, 1e-9);
  EXPECT_NEAR(r.rate, std::tanh(1.0) - std::log(std::cosh(1.0)), 1e-12);
  EXPECT_NEAR(r.rate, 0.3278133, 1e-7);
}

TEST(Legendre, OriginIsZero) {
  oracle::ModelGen gen(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = legendre_transform(gen.real_model(), 0.0);
    EXPECT_NEAR(r.rate, 0.0, 1e-15);
    EXPECT_NEAR(r.lambda_star, 0.0, 1e-12);
    EXPECT_EQ(r.status, RateStatus::interior);
  }
}

TEST(Legendre, BoundaryAndBeyond) {
  const auto b = legendre_transform(pure(1), 1.0);
  EXPECT_EQ(b.status, RateStatus::boundary);
  EXPECT_NEAR(b.rate, std::log(2.0), 1e-15);
  EXPECT_EQ(b.lambda_star, kInfinity);
  const auto lb = legendre_transform(pure(1), -1.0);
  EXPECT_EQ(lb.status, RateStatus::boundary);
  EXPECT_EQ(lb.lambda_star, -kInfinity);
  const auto out = legendre_transform(pure(1), 1.5);
  EXPECT_EQ(out.status, RateStatus::infinite);
  EXPECT_EQ(out.rate, kInfinity);
  EXPECT_STREQ(status_name(RateStatus::boundary), "boundary");
}

TEST(Legendre, NearEdgeStaysFinite) {
  for (double x : {0.999, 0.999999, 1 - 1e-12}) {
    const auto r = legendre_transform(pure(1), x);
    EXPECT_EQ(r.status, RateStatus::interior);
    EXPECT_NEAR(r.rate, coin_entropy_rate(x), 1e-9);
  }
}

TEST(Legendre, AgreesWithEntropyFormForCoins) {
  for (int k = 0; k <= 50; ++k) {
    const double x = -0.99 + 1.98 * k / 50.0;
    EXPECT_NEAR(legendre_transform(pure(1), x).rate, coin_entropy_rate(x), 1e-8);
    EXPECT_NEAR(legendre_transform(pure(2), 2 * x).rate, coin_entropy_rate(x), 1e-8);
  }
}

TEST(Legendre, RateInvariantsOnRandomModels) {
  oracle::ModelGen gen(2);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = gen.real_model();
    const auto mix = limit_mixture(m);
    const double lo = mix.lower_edge();
    const double hi = mix.upper_edge();
    std::vector<double> xs;
    std::vector<double> rates;
    for (int k = 1; k < 40; ++k) {
      const double x = lo + (hi - lo) * k / 40.0;
      const auto r = legendre_transform(mix, x);
      ASSERT_EQ(r.status, RateStatus::interior);
      EXPECT_GE(r.rate, 0.0);
      if (std::abs(x) > 1e-9) EXPECT_GT(r.rate, 0.0);
      const auto p = mix(r.lambda_star);
      EXPECT_NEAR(p.d1, x, 1e-8 * std::max(1.0, std::abs(x)));
      EXPECT_NEAR(p.value + r.rate, r.lambda_star * x, 1e-9 * std::max(1.0, std::abs(r.lambda_star * x)));
      xs.push_back(x);
      rates.push_back(r.rate);
    }
    for (std::size_t j = 1; j + 1 < xs.size(); ++j) {
      EXPECT_LE(rates[j], 0.5 * (rates[j - 1] + rates[j + 1]) + 1e-9);
    }
  }
}

TEST(Legendre, SupremumNotBeatenOnAGrid) {
  oracle::ModelGen gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mix = limit_mixture(gen.real_model());
    const double x = 0.5 * mix.upper_edge();
    const auto r = legendre_transform(mix, x);
    for (double l = -30; l <= 30; l += 0.01) EXPECT_LE(l * x - mix(l).value, r.rate + 1e-12);
  }
}

TEST(Legendre, EdgeRateOfMixture) {
  auto m = PortfolioModel::weighted({coin(1), LossClass::make("t", {-1, 0, 3}, {0.5, 0.25, 0.25})}, {0.5, 0.5});
  const auto r = legendre_transform(m, 2.0);
  EXPECT_EQ(r.status, RateStatus::boundary);
  EXPECT_NEAR(r.rate, -(0.5 * std::log(0.5) + 0.5 * std::log(0.25)), 1e-14);
}

TEST(Legendre, WeightedOnlyForLimitForm) {
  auto m = PortfolioModel::assigned({coin(1)}, AssignmentRule::round_robin({1}));
  EXPECT_THROW(legendre_transform(m, 0.5), ModelError);
}

TEST(ChernoffRate, RoundRobinPairEqualsEqualWeightLimit) {
  auto rr = PortfolioModel::assigned({coin(1), coin(2)}, AssignmentRule::round_robin({1, 1}));
  auto w = PortfolioModel::weighted({coin(1), coin(2)}, {0.5, 0.5});
  EXPECT_NEAR(chernoff_rate(rr, 2, 0.5).rate, legendre_transform(w, 0.5).rate, 1e-14);
  EXPECT_NEAR(chernoff_rate(rr, 4000, 0.5).rate, 0.051194, 1e-6);
}

TEST(ClosedForms, RateI1) {
  EXPECT_EQ(rate_I1(0.0), 0.0);
  EXPECT_NEAR(rate_I1(0.5), std::log(2.0) + 0.75 * std::log(0.75) + 0.25 * std::log(0.25), 1e-15);
  EXPECT_NEAR(rate_I1(0.5), 0.1308, 1e-4);
  EXPECT_NEAR(rate_I1(1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(rate_I1(-1.0), std::log(2.0), 1e-15);
  EXPECT_EQ(rate_I1(1.5), kInfinity);
  EXPECT_EQ(rate_I1(-1.0000001), kInfinity);
  for (double x = -0.99; x < 1; x += 0.01) EXPECT_NEAR(rate_I1(x), coin_entropy_rate(x), 1e-14);
}

TEST(ClosedForms, RateI2) {
  EXPECT_EQ(rate_I2(0.0), 0.0);
  // I2(x) = I1(x/2); at x = 0.5 this is 0.0315839...
  EXPECT_NEAR(rate_I2(0.5), coin_entropy_rate(0.25), 1e-15);
  EXPECT_NEAR(rate_I2(0.5), 0.0315839, 1e-7);
  EXPECT_NEAR(rate_I2(2.0), std::log(2.0), 1e-15);
  EXPECT_EQ(rate_I2(2.5), kInfinity);
  EXPECT_EQ(rate_closed_form(1, 0.5), rate_I1(0.5));
  EXPECT_EQ(rate_closed_form(2, 0.5), rate_I2(0.5));
  EXPECT_THROW(rate_closed_form(3, 0.5), std::invalid_argument);
}

TEST(ClosedForms, TinyArgumentsKeepRelativeAccuracy) {
  for (double x : {1e-3, 1e-6, 1e-9}) {
    EXPECT_NEAR(rate_I1(x) / (x * x), 0.5 + x * x / 12, 1e-12);
    EXPECT_NEAR(rate_I2(x) / (x * x), 0.125 + x * x / 192, 1e-12);
  }
}

TEST(Expansion, Coefficients) {
  const auto c1 = taylor_coefficients(1);
  EXPECT_DOUBLE_EQ(c1[0], 0.5);
  EXPECT_DOUBLE_EQ(c1[1], 1.0 / 12);
  EXPECT_DOUBLE_EQ(c1[2], 1.0 / 30);
  const auto c2 = taylor_coefficients(2);
  EXPECT_DOUBLE_EQ(c2[0], 1.0 / 8);
  EXPECT_DOUBLE_EQ(c2[1], 1.0 / 192);
  EXPECT_DOUBLE_EQ(c2[2], 1.0 / 1920);
}

TEST(Expansion, ResidualIsEighthOrder) {
  const double x = 0.1;
  const double p6 = 0.005 + 1e-4 / 12 + 1e-6 / 30;
  EXPECT_LE(std::abs(rate_I1(x) - p6), 1e-8 * 0.02);
  EXPECT_GT(rate_I1(x) - p6, 0.0);
  const double q6 = 0.125 * 0.01 + 1e-4 / 192 + 1e-6 / 1920;
  EXPECT_LE(std::abs(rate_I2(x) - q6), 1e-8 * 0.02 / 256);
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(0.01 * k);
  // The x^8 coefficients are 1/56 and 1/(56 * 256).
  EXPECT_NEAR(rate_expansion_check(1, grid), 1.0 / 56, 2e-3);
  EXPECT_NEAR(rate_expansion_check(2, grid), 1.0 / 56 / 256, 1e-5);
  EXPECT_NEAR(rate_I1(1e-4) / 1e-8, 0.5, 1e-8);
  EXPECT_THROW(rate_expansion_check(1, std::vector<double>{0.5}), std::invalid_argument);
}

TEST(UpperBound, BlockModelBetweenClosedForms) {
  auto m = PortfolioModel::assigned({coin(1), coin(2)}, AssignmentRule::blocks(1, 10, {0, 1}));
  std::vector<double> grid;
  for (int k = 0; k <= 2000; ++k) grid.push_back(0.001 * k);
  const std::vector<std::uint64_t> checkpoints{11, 111, 1111, 11111, 111111};
  const auto est = rate_upper_bound(m, 0.5, grid, checkpoints);
  EXPECT_GE(est.value, rate_I2(0.5) - 1e-6);
  EXPECT_LE(est.value, rate_I1(0.5));
  EXPECT_GT(est.value, 0.0);
}

TEST(UpperBound, PositiveForSmallX) {
  auto m = PortfolioModel::assigned({coin(1), coin(2)}, AssignmentRule::blocks(1, 10, {0, 1}));
  std::vector<double> grid;
  for (int k = 0; k <= 4000; ++k) grid.push_back(0.0005 * k);
  const std::vector<std::uint64_t> checkpoints{1, 11, 111, 1111};
  double previous = kInfinity;
  for (double x : {0.4, 0.2, 0.1, 0.05, 0.02}) {
    const auto est = rate_upper_bound(m, x, grid, checkpoints);
    EXPECT_GT(est.value, 0.0);
    EXPECT_LT(est.value, previous);
    previous = est.value;
  }
}

TEST(UpperBound, SingleClassMatchesTransform) {
  auto m = PortfolioModel::assigned({coin(1)}, AssignmentRule::round_robin({1}));
  std::vector<double> grid;
  for (int k = 0; k <= 5000; ++k) grid.push_back(0.001 * k);
  const std::vector<std::uint64_t> checkpoints{1, 10, 100};
  for (double x : {0.1, 0.5, 0.9}) {
    const auto est = rate_upper_bound(m, x, grid, checkpoints);
    const double exact = rate_I1(x);
    EXPECT_LE(est.value, exact + 1e-12);
    // A grid of step h loses at most h^2 Lambda''/2 <= h^2/2.
    EXPECT_GE(est.value, exact - 0.5e-6);
  }
}
