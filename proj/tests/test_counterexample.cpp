#include <gtest/gtest.h>

#include <cmath>

#include "lossdev/counterexample.hpp"
#include "lossdev/legendre.hpp"
#include "oracles.hpp"

using namespace lossdev;

TEST(Build, BlocksAndEndDensities) {
  const auto ce = build_counterexample(10, 6);
  ASSERT_EQ(ce.blocks.size(), 6u);
  EXPECT_EQ(ce.blocks.back().last, 111111u);
  EXPECT_EQ(ce.blocks[4].last, 11111u);
  EXPECT_NEAR(ce.class1_end_density, 10101.0 / 11111, 1e-15);
  EXPECT_NEAR(ce.class2_end_density, 10101.0 / 111111, 1e-15);
  EXPECT_NEAR(ce.limit_epsilon, 1.0 / 11, 1e-15);
  EXPECT_EQ(ce.bounds.c0, 2.0);
  EXPECT_EQ(ce.bounds.c1, 1.0);
  EXPECT_TRUE(validate_model(ce.model, ce.bounds).empty());
}

TEST(Build, DensitiesSwingPastThresholds) {
  const auto ce = build_counterexample(10, 6);
  const auto p = density_profile(ce.model.rule(), ce.blocks.back().last);
  EXPECT_LT(p.running_min(), 0.15);
  EXPECT_GT(p.running_max(), 0.85);
  EXPECT_LE(ce.class2_end_density, ce.limit_epsilon + 1e-12);
  EXPECT_GE(ce.class1_end_density, 1 - ce.limit_epsilon - 1e-12);
}

TEST(Build, SmallGrowthSchedule) {
  const auto ce = build_counterexample(2, 3);
  ASSERT_EQ(ce.blocks.size(), 3u);
  EXPECT_EQ(ce.blocks[0].first, 1u);
  EXPECT_EQ(ce.blocks[0].last, 1u);
  EXPECT_EQ(ce.blocks[1].first, 2u);
  EXPECT_EQ(ce.blocks[1].last, 3u);
  EXPECT_EQ(ce.blocks[2].first, 4u);
  EXPECT_EQ(ce.blocks[2].last, 7u);
  EXPECT_EQ(ce.blocks[0].class_index, 0u);
  EXPECT_EQ(ce.blocks[1].class_index, 1u);
  EXPECT_EQ(ce.blocks[2].class_index, 0u);
  EXPECT_THROW(build_counterexample(1, 3), ModelError);
  EXPECT_THROW(build_counterexample(10, 0), ModelError);
}

TEST(Subsequences, ShallowReport) {
  const auto ce = build_counterexample(10, 4);
  const auto r1 = subsequence_rates(ce.model, 0.5, 1, 4);
  const auto r2 = subsequence_rates(ce.model, 0.5, 2, 4);
  EXPECT_NEAR(r1.target, -rate_I1(0.5), 1e-15);
  EXPECT_NEAR(r2.target, -rate_I2(0.5), 1e-15);
  ASSERT_EQ(r1.points.size(), 2u);
  ASSERT_EQ(r2.points.size(), 2u);
  EXPECT_EQ(r1.points[0].n, 1u);
  EXPECT_EQ(r1.points[1].n, 111u);
  EXPECT_EQ(r2.points[0].n, 11u);
  EXPECT_EQ(r2.points[1].n, 1111u);
  EXPECT_FALSE(r1.partial);
  for (const auto* r : {&r1, &r2}) {
    for (std::size_t j = 0; j < r->points.size(); ++j) {
      const auto& p = r->points[j];
      EXPECT_LE(p.log_rate, 0.0);
      // The exact rate respects the finite-n Chernoff bound.
      EXPECT_LE(p.log_rate, p.chernoff_rate + 1e-12);
      if (j > 0) EXPECT_GT(p.n, r->points[j - 1].n);
    }
    EXPECT_NEAR(r->gap, std::abs(r->points.back().log_rate - r->target), 1e-15);
  }
  // P[M_1 >= 0.5] = 1/2.
  EXPECT_NEAR(r1.points[0].log_rate, std::log(0.5), 1e-15);
}

TEST(Subsequences, ExactRatesTrackTheMixtureExponent) {
  const auto ce = build_counterexample(10, 5);
  const auto r1 = subsequence_rates(ce.model, 0.5, 1, 5);
  const auto& last = r1.points.back();
  EXPECT_EQ(last.n, 11111u);
  // Prefactor allowance log(n)/n.
  EXPECT_NEAR(last.log_rate, last.chernoff_rate, std::log(11111.0) / 11111 * 2);
}

TEST(Subsequences, InfiniteTargetBeyondClassOneSupport) {
  const auto ce = build_counterexample(10, 5);
  const auto r = subsequence_rates(ce.model, 1.5, 1, 5);
  EXPECT_TRUE(r.target_infinite);
  EXPECT_EQ(r.target, -kInfinity);
  EXPECT_EQ(r.gap, kInfinity);
  // With nu_2/n <= 1/11 the mean cannot reach 1.5 at the class-1 ends.
  for (const auto& p : r.points) {
    EXPECT_TRUE(p.impossible);
    EXPECT_EQ(p.log_rate, -kInfinity);
  }
}

TEST(Subsequences, BudgetExhaustionGivesPartialReport) {
  const auto ce = build_counterexample(10, 6);
  OracleOptions small;
  small.memory_budget = 200000;
  const auto r = subsequence_rates(ce.model, 0.5, 2, 6, small);
  EXPECT_TRUE(r.partial);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_EQ(r.points.back().n, 1111u);
}

TEST(SectionMeans, TwoCoins) {
  const auto ce = build_counterexample(10, 3);
  // n = 12: class-1 contracts are k = 1 and k = 12.
  ASSERT_EQ(ce.model.counts(12)[0], 2u);
  EXPECT_NEAR(section_mean_tail(ce.model, 12, 1, 0.5).probability, 0.25, 1e-15);
  EXPECT_TRUE(section_mean_tail(ce.model, 12, 1, 1.0).impossible);
  EXPECT_GT(section_mean_tail(ce.model, 12, 1, 0.99).probability, 0.0);
  EXPECT_THROW(section_mean_tail(ce.model, 1, 2, 0.5), ModelError);
  EXPECT_THROW(section_mean_tail(ce.model, 12, 3, 0.5), ModelError);
}

TEST(SectionMeans, ClassOneRateConverges) {
  const auto ce = build_counterexample(10, 5);
  const std::uint64_t n = 11111;
  const auto nu1 = ce.model.counts(n)[0];
  ASSERT_GE(nu1, 2000u);
  const auto t = section_mean_tail(ce.model, n, 1, 0.5);
  EXPECT_NEAR(t.log_probability / static_cast<double>(nu1), -rate_I1(0.5), 0.02);
}

TEST(Sandwich, ExactBoundsHoldEverywhere) {
  const auto ce = build_counterexample(10, 4);
  const auto rows = sandwich_check(ce.model, 0.5, {100, 1000, 5000});
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.chernoff_ok) << "n=" << r.n;
    EXPECT_TRUE(r.product_ok) << "n=" << r.n;
    EXPECT_TRUE(r.lower_ok) << "n=" << r.n;
    EXPECT_TRUE(r.upper_ok) << "n=" << r.n;
    EXPECT_GE(r.exact_rate, r.lower_target - r.allowance);
    EXPECT_LE(r.exact_rate, r.upper_target + r.allowance);
    EXPECT_NEAR(r.allowance, std::log(static_cast<double>(r.n)) / static_cast<double>(r.n), 1e-15);
  }
  EXPECT_EQ(rows[0].nu1, ce.model.counts(100)[0]);
}

TEST(Sandwich, ZeroThreshold) {
  const auto ce = build_counterexample(10, 4);
  const auto rows = sandwich_check(ce.model, 0.0, {100, 1000});
  for (const auto& r : rows) {
    EXPECT_EQ(r.lower_target, 0.0);
    EXPECT_EQ(r.upper_target, 0.0);
    EXPECT_TRUE(r.chernoff_ok);
    EXPECT_TRUE(r.product_ok);
    EXPECT_LT(std::abs(r.exact_rate), 2 * r.allowance);
  }
}

TEST(Counterexample, UnitThresholdAlwaysReachable) {
  const auto ce = build_counterexample(10, 4);
  for (std::uint64_t n = 1; n <= 2000; ++n) {
    const auto t = exact_tail(ce.model, n, 1.0);
    ASSERT_FALSE(t.impossible) << "n=" << n;
    EXPECT_GT(t.log_probability, -kInfinity);
  }
}
