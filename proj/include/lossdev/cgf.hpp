// Moment and cumulant generating functions of loss classes and mixtures.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lossdev/model.hpp"

namespace lossdev {

/// Value and first two derivatives of a cumulant generating function at lambda.
struct CgfPoint {
  double lambda = 0.0;
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// phi(lambda) = E[exp(lambda X)]. Finite whenever |lambda| * max|x| <= 700.
double class_mgf(const LossClass& cls, double lambda);

/// log phi and its derivatives, evaluated from max-shifted exponentials.
CgfPoint class_log_mgf(const LossClass& cls, double lambda);

/// Lambda(lambda) = sum_i w_i log phi_i(lambda) for nonnegative weights w_i.
///
/// Both the limit CGF of a weighted model and the finite-n empirical CGF
/// (weights nu_i(n)/n) are mixtures of this form.
class MixtureCgf {
 public:
  MixtureCgf(std::vector<LossClass> classes, std::vector<double> weights);

  /// Weights nu_i/n taken from a finite composition.
  static MixtureCgf from_composition(std::span<const ClassCount> composition);

  CgfPoint operator()(double lambda) const;

  std::span<const LossClass> classes() const { return classes_; }
  std::span<const double> weights() const { return weights_; }

  /// Range of the derivative: lim Lambda'(lambda) as lambda -> +-infinity.
  double upper_edge() const;
  double lower_edge() const;
  /// -sum w_i log P[X_i = max], the transform's value at upper_edge().
  double upper_edge_rate() const;
  double lower_edge_rate() const;
  /// Largest |x| over the supports of classes with positive weight.
  double max_abs() const;

 private:
  std::vector<LossClass> classes_;
  std::vector<double> weights_;
};

MixtureCgf limit_mixture(const PortfolioModel& model);
MixtureCgf empirical_mixture(const PortfolioModel& model, std::uint64_t n);

/// Limit CGF of a weighted-regime model.
CgfPoint limit_cgf(const PortfolioModel& model, double lambda);

/// (1/n) sum_{k<=n} log phi_{class(k)}(lambda).
CgfPoint empirical_cgf(const PortfolioModel& model, std::uint64_t n, double lambda);

/// Cumulants kappa_1..kappa_6 from raw moments.
std::array<double, 6> cumulants(const LossClass& cls);

}  // namespace lossdev
