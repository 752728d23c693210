// Loss classes, portfolio models and the bounded-loss assumption checks.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lossdev {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bounded, finite-support loss distribution for one contract type.
///
/// Construction sorts the support, merges duplicate points, drops zero-mass
/// points and renormalizes the probabilities exactly. With `center` set the
/// mean is subtracted so the class describes X = L - E[L].
class LossClass {
 public:
  static LossClass make(std::string name, std::vector<double> support,
                        std::vector<double> probs, bool center = false);

  const std::string& name() const { return name_; }
  std::span<const double> support() const { return support_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return support_.size(); }

  double mean() const;
  double variance() const;
  double min_value() const { return support_.front(); }
  double max_value() const { return support_.back(); }
  double max_abs() const;
  double prob_of_min() const { return probs_.front(); }
  double prob_of_max() const { return probs_.back(); }

  /// Law of -X.
  LossClass reflected() const;

 private:
  LossClass() = default;

  std::string name_;
  std::vector<double> support_;
  std::vector<double> probs_;
};

/// Uniform bound c0 on |X_k| and variance floor c1.
struct AssumptionBounds {
  double c0 = 1.0;
  double c1 = 1.0;

  static AssumptionBounds make(double c0, double c1);
};

/// Contiguous run [first, last] (1-based, inclusive) of contracts of one class.
struct Block {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  std::size_t class_index = 0;

  std::uint64_t length() const { return last - first + 1; }
};

struct RoundRobin {
  std::vector<std::uint64_t> weights;
};

/// Blocks of length a0, a0*B, a0*B^2, ... assigned cyclically to `order`.
struct BlockSchedule {
  std::uint64_t first_block = 1;
  std::uint64_t growth = 2;
  std::vector<std::size_t> order;
};

/// Deterministic map from contract index k >= 1 to a class index.
class AssignmentRule {
 public:
  static AssignmentRule round_robin(std::vector<std::uint64_t> weights);
  static AssignmentRule blocks(std::uint64_t first_block, std::uint64_t growth,
                               std::vector<std::size_t> order);

  bool is_round_robin() const { return std::holds_alternative<RoundRobin>(kind_); }
  const RoundRobin& as_round_robin() const { return std::get<RoundRobin>(kind_); }
  const BlockSchedule& as_blocks() const { return std::get<BlockSchedule>(kind_); }

  /// Number of classes the rule refers to (max class index + 1).
  std::size_t class_count() const;
  std::size_t class_of(std::uint64_t k) const;
  std::vector<std::uint64_t> counts(std::uint64_t n) const;

  /// The first `depth` blocks of a block schedule.
  std::vector<Block> leading_blocks(std::size_t depth) const;

 private:
  explicit AssignmentRule(std::variant<RoundRobin, BlockSchedule> kind)
      : kind_(std::move(kind)) {}

  std::variant<RoundRobin, BlockSchedule> kind_;
};

/// A loss class together with how many contracts of it enter a portfolio.
struct ClassCount {
  LossClass loss_class;
  std::uint64_t count = 0;
};

class PortfolioModel {
 public:
  /// Asymptotic class densities d_i (nonnegative, summing to one).
  static PortfolioModel weighted(std::vector<LossClass> classes, std::vector<double> weights);
  static PortfolioModel assigned(std::vector<LossClass> classes, AssignmentRule rule);

  std::span<const LossClass> classes() const { return classes_; }
  std::size_t class_count() const { return classes_.size(); }

  bool is_weighted() const { return std::holds_alternative<std::vector<double>>(regime_); }
  std::span<const double> weights() const;
  const AssignmentRule& rule() const;

  /// Per-class contract counts among the first n contracts. The weighted
  /// regime is realized by largest-remainder apportionment.
  std::vector<std::uint64_t> counts(std::uint64_t n) const;

  /// Classes with nonzero count among the first n contracts.
  std::vector<ClassCount> composition(std::uint64_t n) const;

 private:
  PortfolioModel(std::vector<LossClass> classes,
                 std::variant<std::vector<double>, AssignmentRule> regime)
      : classes_(std::move(classes)), regime_(std::move(regime)) {}

  std::vector<LossClass> classes_;
  std::variant<std::vector<double>, AssignmentRule> regime_;
};

enum class Clause { centering, bound, variance_floor };

const char* clause_name(Clause clause);

struct Violation {
  std::string class_name;
  Clause clause;
  std::string message;
};

/// Checks every class against the bounded-loss assumption. Violations are
/// returned as data; an empty list means the model is admissible.
std::vector<Violation> validate_model(const PortfolioModel& model, const AssumptionBounds& bounds);

/// Largest-remainder apportionment of n items to the given weights
/// (ties broken by class index).
std::vector<std::uint64_t> apportion(std::span<const double> weights, std::uint64_t n);

std::vector<std::uint64_t> class_counts(const AssignmentRule& rule, std::uint64_t n);

struct DensitySample {
  std::uint64_t n = 0;
  std::vector<double> density;
  double running_min = 0.0;  // min over m <= n of nu_1(m)/m
  double running_max = 0.0;
};

struct DensityProfile {
  std::vector<DensitySample> samples;

  double running_min() const { return samples.back().running_min; }
  double running_max() const { return samples.back().running_max; }
};

/// nu_i(n)/n for n = 1..n_max. The running extremes track the first class.
DensityProfile density_profile(const AssignmentRule& rule, std::uint64_t n_max);

// Model file loading (JSON).

class ParseError : public ModelError {
 public:
  ParseError(const std::string& field, std::size_t line, const std::string& what);

  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

class ValidationError : public ModelError {
 public:
  explicit ValidationError(Violation violation);

  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

struct LoadedModel {
  PortfolioModel model;
  AssumptionBounds bounds;
};

/// Parses a model file. Fails with ParseError on malformed input and with
/// ValidationError on the first assumption violation.
LoadedModel load_model(const std::string& text);

/// Same as load_model but keeps the violations instead of throwing on them.
LoadedModel parse_model(const std::string& text);

}  // namespace lossdev
