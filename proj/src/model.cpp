#include "lossdev/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace lossdev {

namespace {

constexpr double kProbabilityTolerance = 1e-12;
constexpr double kCenteringTolerance = 1e-10;

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) return std::numeric_limits<std::uint64_t>::max();
  return a + b;
}

}  // namespace

LossClass LossClass::make(std::string name, std::vector<double> support, std::vector<double> probs,
                          bool center) {
  if (support.empty()) throw ModelError("class '" + name + "': empty support");
  if (support.size() != probs.size()) {
    throw ModelError("class '" + name + "': support and probs differ in length");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (!std::isfinite(support[j]) || !std::isfinite(probs[j])) {
      throw ModelError("class '" + name + "': non-finite support value or probability");
    }
    if (probs[j] < 0.0) throw ModelError("class '" + name + "': negative probability");
    total += probs[j];
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "class '" << name << "': probabilities sum to " << total << ", expected 1";
    throw ModelError(msg.str());
  }

  std::vector<std::pair<double, double>> points;
  points.reserve(support.size());
  for (std::size_t j = 0; j < support.size(); ++j) points.emplace_back(support[j], probs[j]);
  std::sort(points.begin(), points.end());

  LossClass out;
  out.name_ = std::move(name);
  for (const auto& [value, prob] : points) {
    if (!out.support_.empty() && out.support_.back() == value) {
      out.probs_.back() += prob;
    } else {
      out.support_.push_back(value);
      out.probs_.push_back(prob);
    }
  }
  // Drop zero-mass points after merging.
  std::size_t kept = 0;
  for (std::size_t j = 0; j < out.support_.size(); ++j) {
    if (out.probs_[j] > 0.0) {
      out.support_[kept] = out.support_[j];
      out.probs_[kept] = out.probs_[j];
      ++kept;
    }
  }
  out.support_.resize(kept);
  out.probs_.resize(kept);
  for (double& p : out.probs_) p /= total;

  if (center) {
    const double mu = out.mean();
    for (double& v : out.support_) v -= mu;
  }
  return out;
}

double LossClass::mean() const {
  double acc = 0.0;
  for (std::size_t j = 0; j < support_.size(); ++j) acc += probs_[j] * support_[j];
  return acc;
}

double LossClass::variance() const {
  const double mu = mean();
  double acc = 0.0;
  for (std::size_t j = 0; j < support_.size(); ++j) {
    const double d = support_[j] - mu;
    acc += probs_[j] * d * d;
  }
  return acc;
}

double LossClass::max_abs() const { return std::max(std::abs(support_.front()), std::abs(support_.back())); }

LossClass LossClass::reflected() const {
  LossClass out;
  out.name_ = name_;
  out.support_.assign(support_.rbegin(), support_.rend());
  out.probs_.assign(probs_.rbegin(), probs_.rend());
  for (double& v : out.support_) v = -v;
  return out;
}

AssumptionBounds AssumptionBounds::make(double c0, double c1) {
  if (!(c0 > 0.0) || !(c1 > 0.0)) throw ModelError("bounds: c0 and c1 must be positive");
  if (c1 > c0 * c0) throw ModelError("bounds: c1 exceeds c0^2");
  return AssumptionBounds{c0, c1};
}

AssignmentRule AssignmentRule::round_robin(std::vector<std::uint64_t> weights) {
  if (weights.empty()) throw ModelError("round_robin: no weights");
  std::uint64_t total = 0;
  for (auto w : weights) total = saturating_add(total, w);
  if (total == 0) throw ModelError("round_robin: weights sum to zero");
  return AssignmentRule(RoundRobin{std::move(weights)});
}

AssignmentRule AssignmentRule::blocks(std::uint64_t first_block, std::uint64_t growth,
                                      std::vector<std::size_t> order) {
  if (first_block < 1) throw ModelError("blocks: initial block length must be >= 1");
  if (growth < 2) throw ModelError("blocks: growth factor must be an integer >= 2");
  if (order.empty()) throw ModelError("blocks: empty class order");
  return AssignmentRule(BlockSchedule{first_block, growth, std::move(order)});
}

std::size_t AssignmentRule::class_count() const {
  if (is_round_robin()) return as_round_robin().weights.size();
  const auto& order = as_blocks().order;
  return *std::max_element(order.begin(), order.end()) + 1;
}

std::size_t AssignmentRule::class_of(std::uint64_t k) const {
  if (k == 0) throw ModelError("contract indices start at 1");
  if (is_round_robin()) {
    const auto& w = as_round_robin().weights;
    const std::uint64_t cycle = std::accumulate(w.begin(), w.end(), std::uint64_t{0});
    std::uint64_t r = (k - 1) % cycle;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (r < w[i]) return i;
      r -= w[i];
    }
    return w.size() - 1;  // unreachable
  }
  const auto& s = as_blocks();
  std::uint64_t end = 0;
  std::uint64_t len = s.first_block;
  for (std::size_t j = 0;; ++j) {
    end = saturating_add(end, len);
    if (k <= end) return s.order[j % s.order.size()];
    len = saturating_mul(len, s.growth);
  }
}

std::vector<std::uint64_t> AssignmentRule::counts(std::uint64_t n) const {
  std::vector<std::uint64_t> out(class_count(), 0);
  if (is_round_robin()) {
    const auto& w = as_round_robin().weights;
    const std::uint64_t cycle = std::accumulate(w.begin(), w.end(), std::uint64_t{0});
    const std::uint64_t full = n / cycle;
    std::uint64_t rem = n % cycle;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::uint64_t extra = std::min(w[i], rem);
      out[i] = full * w[i] + extra;
      rem -= extra;
    }
    return out;
  }
  const auto& s = as_blocks();
  std::uint64_t remaining = n;
  std::uint64_t len = s.first_block;
  for (std::size_t j = 0; remaining > 0; ++j) {
    const std::uint64_t take = std::min(len, remaining);
    out[s.order[j % s.order.size()]] += take;
    remaining -= take;
    len = saturating_mul(len, s.growth);
  }
  return out;
}

std::vector<Block> AssignmentRule::leading_blocks(std::size_t depth) const {
  if (is_round_robin()) throw ModelError("leading_blocks: rule is not a block schedule");
  const auto& s = as_blocks();
  std::vector<Block> out;
  std::uint64_t first = 1;
  std::uint64_t len = s.first_block;
  for (std::size_t j = 0; j < depth; ++j) {
    const std::uint64_t last = saturating_add(first, len - 1);
    out.push_back(Block{first, last, s.order[j % s.order.size()]});
    if (last == std::numeric_limits<std::uint64_t>::max()) break;
    first = last + 1;
    len = saturating_mul(len, s.growth);
  }
  return out;
}

PortfolioModel PortfolioModel::weighted(std::vector<LossClass> classes, std::vector<double> weights) {
  if (classes.empty()) throw ModelError("model: no classes");
  if (weights.size() != classes.size()) throw ModelError("weighted: one weight per class required");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ModelError("weighted: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) throw ModelError("weighted: weights must sum to 1");
  for (double& w : weights) w /= total;
  return PortfolioModel(std::move(classes), std::move(weights));
}

PortfolioModel PortfolioModel::assigned(std::vector<LossClass> classes, AssignmentRule rule) {
  if (classes.empty()) throw ModelError("model: no classes");
  if (rule.class_count() > classes.size()) {
    throw ModelError("assigned: rule refers to a class index beyond the class list");
  }
  return PortfolioModel(std::move(classes), std::move(rule));
}

std::span<const double> PortfolioModel::weights() const {
  if (!is_weighted()) throw ModelError("model is not in the weighted regime");
  return std::get<std::vector<double>>(regime_);
}

const AssignmentRule& PortfolioModel::rule() const {
  if (is_weighted()) throw ModelError("model is not in the assigned regime");
  return std::get<AssignmentRule>(regime_);
}

std::vector<std::uint64_t> PortfolioModel::counts(std::uint64_t n) const {
  if (is_weighted()) return apportion(weights(), n);
  auto c = rule().counts(n);
  c.resize(classes_.size(), 0);
  return c;
}

std::vector<ClassCount> PortfolioModel::composition(std::uint64_t n) const {
  const auto c = counts(n);
  std::vector<ClassCount> out;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (c[i] > 0) out.push_back(ClassCount{classes_[i], c[i]});
  }
  return out;
}

const char* clause_name(Clause clause) {
  switch (clause) {
    case Clause::centering: return "centering";
    case Clause::bound: return "bound";
    case Clause::variance_floor: return "variance floor";
  }
  return "unknown";
}

std::vector<Violation> validate_model(const PortfolioModel& model, const AssumptionBounds& bounds) {
  std::vector<Violation> out;
  for (const auto& cls : model.classes()) {
    const double mu = cls.mean();
    if (std::abs(mu) > kCenteringTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "mean " << mu << " is not zero";
      out.push_back({cls.name(), Clause::centering, msg.str()});
    }
    if (cls.max_abs() > bounds.c0 * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "bound exceeded: max |x| = " << cls.max_abs() << " > c0 = " << bounds.c0;
      out.push_back({cls.name(), Clause::bound, msg.str()});
    }
    const double var = cls.variance();
    if (var < bounds.c1 * (1.0 - 1e-12)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "variance floor: Var = " << var << " < c1 = " << bounds.c1;
      out.push_back({cls.name(), Clause::variance_floor, msg.str()});
    }
  }
  return out;
}

std::vector<std::uint64_t> apportion(std::span<const double> weights, std::uint64_t n) {
  const std::size_t p = weights.size();
  std::vector<std::uint64_t> out(p, 0);
  std::vector<double> remainder(p, 0.0);
  std::uint64_t assigned = 0;
  const double total_n = static_cast<double>(n);
  for (std::size_t i = 0; i < p; ++i) {
    const double share = weights[i] * total_n;
    const double whole = std::floor(share);
    out[i] = static_cast<std::uint64_t>(whole);
    remainder[i] = share - whole;
    assigned += out[i];
  }
  std::vector<std::size_t> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  // Rounding in weights[i] * n can overshoot by one unit.
  for (std::size_t j = p; assigned > n && j-- > 0;) {
    if (out[idx[j]] > 0) {
      --out[idx[j]];
      --assigned;
    }
  }
  for (std::size_t j = 0; assigned < n; j = (j + 1) % p) {
    if (weights[idx[j]] > 0.0) {
      ++out[idx[j]];
      ++assigned;
    }
  }
  return out;
}

std::vector<std::uint64_t> class_counts(const AssignmentRule& rule, std::uint64_t n) { return rule.counts(n); }

DensityProfile density_profile(const AssignmentRule& rule, std::uint64_t n_max) {
  if (n_max < 1) throw ModelError("density_profile: n_max must be >= 1");
  DensityProfile out;
  out.samples.reserve(n_max);
  std::vector<std::uint64_t> counts(rule.class_count(), 0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    ++counts[rule.class_of(n)];
    DensitySample s;
    s.n = n;
    s.density.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      s.density[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
    }
    lo = std::min(lo, s.density[0]);
    hi = std::max(hi, s.density[0]);
    s.running_min = lo;
    s.running_max = hi;
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace lossdev
