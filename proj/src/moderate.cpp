#include "lossdev/moderate.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lossdev {

namespace {

// Above this, 1 - Phi(y) leaves the normal double range.
constexpr double kErfcCutoff = 37.0;

/// Mills ratio (1 - Phi(y)) / phi(y) by its continued fraction, y > 0.
double mills_ratio(double y) {
  // R = 1/(y+ 1/(y+ 2/(y+ 3/(y+ ...)))), modified Lentz.
  constexpr double tiny = 1e-300;
  double f = y;
  double c = y;
  double d = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double a = static_cast<double>(k);
    d = y + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = y + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace

MdQuery MdQuery::make(double c, double alpha, std::uint64_t n) {
  if (!(c > 0.0)) throw MdQueryError("moderate deviations: c must be positive");
  if (!(alpha > 0.0 && alpha < 0.5)) throw MdQueryError("moderate deviations: alpha must lie in (0, 1/2)");
  if (n < 1) throw MdQueryError("moderate deviations: n must be >= 1");
  MdQuery q{c, alpha, n};
  if (!(q.y() > 1.0)) {
    throw MdQueryError("moderate deviations: y = c n^alpha = " + std::to_string(q.y()) +
                       " <= 1 is in the central-limit regime, not covered by the estimate");
  }
  return q;
}

double MdQuery::y() const { return c * std::pow(static_cast<double>(n), alpha); }

PetrovConstants petrov_constants(const AssumptionBounds& bounds) {
  const double H = 1.0 / bounds.c0;
  const double product = bounds.c0 * H;
  return PetrovConstants{H, 0.5 * std::exp(-product), std::exp(product)};
}

double gaussian_upper_tail(double y) {
  if (y < kErfcCutoff) return 0.5 * std::erfc(y * std::numbers::sqrt2 / 2.0);
  return std::exp(log_gaussian_upper_tail(y));
}

double log_gaussian_upper_tail(double y) {
  if (y < 0.0) return std::log1p(-gaussian_upper_tail(-y));
  if (y < kErfcCutoff) return std::log(gaussian_upper_tail(y));
  const double log_density = -0.5 * y * y - 0.5 * std::log(2.0 * std::numbers::pi);
  return log_density + std::log(mills_ratio(y));
}

double variance_sum(const PortfolioModel& model, std::uint64_t n) {
  if (n < 1) throw ModelError("variance_sum: n must be >= 1");
  const auto counts = model.counts(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += static_cast<double>(counts[i]) * model.classes()[i].variance();
  }
  return acc;
}

MdThresholds md_threshold(const MdQuery& q, const PortfolioModel& model, const AssumptionBounds& bounds) {
  const double n = static_cast<double>(q.n);
  const double scale = q.c * std::pow(n, q.alpha - 0.5);
  // c n^(alpha-1) B_n^(1/2) written as scale * sqrt(B_n / n) so that the
  // three thresholds coincide exactly when B_n / n hits a bound.
  return MdThresholds{scale * std::sqrt(variance_sum(model, q.n) / n), scale * bounds.c0,
                      scale * std::sqrt(bounds.c1)};
}

MdPrediction md_log_prob_prediction(const MdQuery& q) {
  const double n = static_cast<double>(q.n);
  const double y = q.y();
  MdPrediction out;
  out.leading = 0.5 * y * y;
  out.correction_scale = y * y * y / std::sqrt(n);
  out.log_prefactor = std::log(y * std::sqrt(2.0 * std::numbers::pi));
  out.correction_ratio = out.correction_scale / out.leading;
  return out;
}

}  // namespace lossdev
