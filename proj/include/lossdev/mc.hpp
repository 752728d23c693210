// Monte Carlo tail estimators, plain and exponentially tilted.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lossdev/exact.hpp"
#include "lossdev/model.hpp"

namespace lossdev {

inline constexpr std::uint64_t kDefaultSeed = 20240531;

class McError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SamplingMethod { plain, tilted };

const char* method_name(SamplingMethod method);

struct TailEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  /// log(estimate), kept separately because very rare events underflow.
  double log_estimate = 0.0;
  std::uint64_t n_samples = 0;
  SamplingMethod method = SamplingMethod::plain;
  double lambda = 0.0;
  std::uint64_t seed = kDefaultSeed;

  /// std_error / estimate; infinity when the estimate is zero.
  double relative_std_error() const;
};

struct McOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;  // 0: hardware concurrency
  TailSide side = TailSide::at_least;
};

/// Vose alias table for O(1) sampling from a finite law.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> probs);

  std::size_t sample(double u) const;
  std::size_t size() const { return threshold_.size(); }

 private:
  std::vector<double> threshold_;
  std::vector<std::size_t> alias_;
};

/// Exponential change of measure p_j exp(lambda v_j) / phi(lambda).
LossClass tilted_class(const LossClass& cls, double lambda);

/// log dP/dP~ along a path with sum `path_sum`: -lambda S + sum_k log phi_k(lambda).
double log_likelihood_ratio(std::span<const ClassCount> composition, double path_sum, double lambda);

/// Indicator-mean estimate of P[M_n >= x].
TailEstimate sample_plain(const PortfolioModel& model, std::uint64_t n, double x, const McOptions& options = {});

/// Importance-sampling estimate of P[M_n >= x], tilting every contract by the
/// maximizer lambda*(x) of the finite-n empirical CGF.
TailEstimate sample_tilted(const PortfolioModel& model, std::uint64_t n, double x, const McOptions& options = {});

}  // namespace lossdev
