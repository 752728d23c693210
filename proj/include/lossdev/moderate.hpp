// Moderate-deviation thresholds and Gaussian tail utilities.
#pragma once

#include <cstdint>
#include <stdexcept>

#include "lossdev/model.hpp"

namespace lossdev {

class MdQueryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Threshold scale y = c n^alpha with 0 < alpha < 1/2.
struct MdQuery {
  double c = 1.0;
  double alpha = 0.25;
  std::uint64_t n = 1;

  /// Throws MdQueryError unless c > 0, 0 < alpha < 1/2, n >= 1 and y > 1.
  static MdQuery make(double c, double alpha, std::uint64_t n);

  double y() const;
};

/// Constants (g, G, H) of the complex-disc MGF condition, certified in
/// closed form from the bound c0: H = 1/c0, g = exp(-c0 H)/2, G = exp(c0 H).
struct PetrovConstants {
  double H = 1.0;
  double g = 0.0;
  double G = 0.0;
};

PetrovConstants petrov_constants(const AssumptionBounds& bounds);

/// 1 - Phi(y).
double gaussian_upper_tail(double y);

/// log(1 - Phi(y)), finite for all finite y.
double log_gaussian_upper_tail(double y);

/// B_n = sum_{k <= n} Var(X_k).
double variance_sum(const PortfolioModel& model, std::uint64_t n);

struct MdThresholds {
  double exact = 0.0;  // c n^(alpha-1) B_n^(1/2)
  double upper = 0.0;  // c c0 n^(alpha-1/2)
  double lower = 0.0;  // c c1^(1/2) n^(alpha-1/2)
};

MdThresholds md_threshold(const MdQuery& q, const PortfolioModel& model, const AssumptionBounds& bounds);

struct MdPrediction {
  double leading = 0.0;           // c^2 n^(2 alpha) / 2, the predicted -log P to first order
  double correction_scale = 0.0;  // y^3 / sqrt(n) = c^3 n^(3 alpha - 1/2), order of the omitted series term
  double log_prefactor = 0.0;     // log(y sqrt(2 pi)), the Gaussian prefactor correction
  double correction_ratio = 0.0;  // correction_scale / leading
};

/// Leading-order prediction of -log P[M_n > c n^(alpha-1) B_n^(1/2)]. The
/// higher-order series is reported only as an order of magnitude.
MdPrediction md_log_prob_prediction(const MdQuery& q);

}  // namespace lossdev
