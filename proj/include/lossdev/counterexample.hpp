// Two-class block-scheduled portfolio whose log-tail rates have two
// different subsequential limits, so no single rate function governs M_n.
#pragma once

#include <cstdint>
#include <vector>

#include "lossdev/exact.hpp"
#include "lossdev/model.hpp"

namespace lossdev {

struct CounterexampleModel {
  PortfolioModel model;
  AssumptionBounds bounds;
  std::uint64_t growth = 10;
  std::size_t depth = 1;
  std::vector<Block> blocks;        // the first `depth` blocks
  double class1_end_density = 1.0;  // nu_1(n)/n at the last class-1 block end
  double class2_end_density = 1.0;  // nu_1(n)/n at the last class-2 block end
  double limit_epsilon = 0.0;       // 1/(growth + 1): how close the densities get to 0 and 1
};

/// Classes {-1, 1} and {-2, 2} (fair coins) alternating in blocks of length
/// 1, B, B^2, ..., class 1 first.
CounterexampleModel build_counterexample(std::uint64_t growth, std::size_t depth);

struct SubsequencePoint {
  std::uint64_t n = 0;
  double class1_density = 0.0;
  double log_rate = 0.0;      // (1/n) log P[M_n >= x]
  bool impossible = false;
  double chernoff_rate = 0.0;  // -sup_l (l x - Lambda_n(l)), the finite-n exponent bound
};

struct SubsequenceReport {
  double x = 0.0;
  int which = 1;
  std::vector<SubsequencePoint> points;
  double target = 0.0;  // -I^(which)(x); -infinity when the closed form is infinite
  bool target_infinite = false;
  double gap = 0.0;  // |last log_rate - target|
  bool partial = false;
};

/// Exact log-tail rates at the ends of the class-`which` blocks among the
/// first `depth` blocks. Stops early (partial = true) when the oracle's
/// memory budget is exceeded.
SubsequenceReport subsequence_rates(const PortfolioModel& model, double x, int which, std::size_t depth,
                                    const OracleOptions& options = {});

/// P[M_n^(which) > x] for the mean of the class-`which` contracts among the first n.
TailProbability section_mean_tail(const PortfolioModel& model, std::uint64_t n, int which, double x,
                                  const OracleOptions& options = {});

struct SandwichRow {
  std::uint64_t n = 0;
  std::uint64_t nu1 = 0;
  double exact_rate = 0.0;     // (1/n) log P[M_n > x]
  double lower_target = 0.0;   // -I1(x)
  double upper_target = 0.0;   // -I2(x)
  double allowance = 0.0;      // log(n)/n prefactor allowance
  double chernoff_rate = 0.0;  // finite-n Chernoff exponent, an exact upper bound
  double product_rate = 0.0;   // (1/n) log(P[M^(1) > x] P[M^(2) > x]), an exact lower bound
  bool lower_ok = false;       // exact_rate >= lower_target - allowance (asymptotic)
  bool upper_ok = false;       // exact_rate <= upper_target + allowance (asymptotic)
  bool chernoff_ok = false;    // must hold for every n
  bool product_ok = false;     // must hold for every n
};

std::vector<SandwichRow> sandwich_check(const PortfolioModel& model, double x, const std::vector<std::uint64_t>& ns,
                                        const OracleOptions& options = {});

}  // namespace lossdev
