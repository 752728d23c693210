#include "lossdev/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "lossdev/legendre.hpp"

namespace lossdev {

namespace {

double density_at(const PortfolioModel& model, std::uint64_t n) {
  return static_cast<double>(model.counts(n)[0]) / static_cast<double>(n);
}

// Slack for comparing two exactly computed log-probabilities.
bool log_leq(double a, double b) {
  if (a == -kInfinity || b == kInfinity) return true;
  return a <= b + 1e-12 * std::max(1.0, std::abs(b));
}

}  // namespace

CounterexampleModel build_counterexample(std::uint64_t growth, std::size_t depth) {
  if (depth < 1) throw ModelError("counterexample: depth must be >= 1");
  std::vector<LossClass> classes{LossClass::make("X1", {-1.0, 1.0}, {0.5, 0.5}),
                                 LossClass::make("X2", {-2.0, 2.0}, {0.5, 0.5})};
  auto rule = AssignmentRule::blocks(1, growth, {0, 1});
  CounterexampleModel out{PortfolioModel::assigned(std::move(classes), rule), AssumptionBounds::make(2.0, 1.0),
                          growth, depth, rule.leading_blocks(depth)};
  for (const auto& b : out.blocks) {
    const double d = density_at(out.model, b.last);
    (b.class_index == 0 ? out.class1_end_density : out.class2_end_density) = d;
  }
  out.limit_epsilon = 1.0 / static_cast<double>(growth + 1);
  return out;
}

SubsequenceReport subsequence_rates(const PortfolioModel& model, double x, int which, std::size_t depth,
                                    const OracleOptions& options) {
  if (which != 1 && which != 2) throw ModelError("subsequence_rates: which must be 1 or 2");
  if (!(x > 0.0)) throw ModelError("subsequence_rates: x must be positive");
  SubsequenceReport report;
  report.x = x;
  report.which = which;
  const double closed = rate_closed_form(which, x);
  report.target_infinite = std::isinf(closed);
  report.target = -closed;

  std::vector<std::uint64_t> ends;
  for (const auto& b : model.rule().leading_blocks(depth)) {
    if (b.class_index == static_cast<std::size_t>(which - 1)) ends.push_back(b.last);
  }

  // Independent oracle runs; results are collected in order of n.
  std::vector<std::future<SubsequencePoint>> jobs;
  for (auto n : ends) {
    jobs.push_back(std::async(std::launch::async, [&model, n, x, &options] {
      SubsequencePoint p;
      p.n = n;
      p.class1_density = density_at(model, n);
      const auto tail = exact_tail(model, n, x, TailSide::at_least, options);
      p.impossible = tail.impossible;
      p.log_rate = tail.log_probability / static_cast<double>(n);
      const auto chernoff = chernoff_rate(model, n, x);
      p.chernoff_rate = chernoff.status == RateStatus::infinite ? -kInfinity : -chernoff.rate;
      return p;
    }));
  }
  for (auto& job : jobs) {
    try {
      report.points.push_back(job.get());
    } catch (const MemoryBudgetExceeded&) {
      report.partial = true;
      break;
    }
  }
  if (!report.points.empty()) {
    const double last = report.points.back().log_rate;
    report.gap = report.target_infinite ? kInfinity : std::abs(last - report.target);
  } else {
    report.gap = kInfinity;
  }
  return report;
}

TailProbability section_mean_tail(const PortfolioModel& model, std::uint64_t n, int which, double x,
                                  const OracleOptions& options) {
  if (which < 1 || static_cast<std::size_t>(which) > model.class_count()) {
    throw ModelError("section_mean_tail: no such class");
  }
  const auto counts = model.counts(n);
  const std::uint64_t nu = counts[static_cast<std::size_t>(which - 1)];
  if (nu == 0) throw ModelError("section_mean_tail: the section is empty at this n");
  const std::vector<ClassCount> section{ClassCount{model.classes()[static_cast<std::size_t>(which - 1)], nu}};
  return composition_tail(section, x, TailSide::greater_than, options);
}

std::vector<SandwichRow> sandwich_check(const PortfolioModel& model, double x, const std::vector<std::uint64_t>& ns,
                                        const OracleOptions& options) {
  std::vector<SandwichRow> rows;
  for (auto n : ns) {
    SandwichRow row;
    row.n = n;
    const auto counts = model.counts(n);
    row.nu1 = counts[0];
    const double dn = static_cast<double>(n);
    const auto tail = exact_tail(model, n, x, TailSide::greater_than, options);
    row.exact_rate = tail.log_probability / dn;
    row.lower_target = -rate_I1(x);
    row.upper_target = -rate_I2(x);
    row.allowance = std::log(dn) / dn;

    const auto chernoff = chernoff_rate(model, n, x);
    row.chernoff_rate = chernoff.status == RateStatus::infinite ? -kInfinity : -chernoff.rate;

    double product_log = 0.0;
    for (int which = 1; which <= 2; ++which) {
      if (counts[static_cast<std::size_t>(which - 1)] == 0) continue;
      product_log += section_mean_tail(model, n, which, x, options).log_probability;
    }
    row.product_rate = product_log / dn;

    row.lower_ok = row.exact_rate >= row.lower_target - row.allowance;
    row.upper_ok = row.exact_rate <= row.upper_target + row.allowance;
    row.chernoff_ok = log_leq(tail.log_probability, row.chernoff_rate * dn);
    row.product_ok = log_leq(product_log, tail.log_probability);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lossdev
