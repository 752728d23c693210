#include "lossdev/cgf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lossdev {

double class_mgf(const LossClass& cls, double lambda) { return std::exp(class_log_mgf(cls, lambda).value); }

CgfPoint class_log_mgf(const LossClass& cls, double lambda) {
  const auto v = cls.support();
  const auto p = cls.probs();
  double shift = -std::numeric_limits<double>::infinity();
  for (double x : v) shift = std::max(shift, lambda * x);

  double s0 = 0.0;
  double s1 = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double w = p[j] * std::exp(lambda * v[j] - shift);
    s0 += w;
    s1 += w * v[j];
  }
  const double mean = s1 / s0;
  // Variance of the tilted law, two-pass so it never goes negative.
  double s2 = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double d = v[j] - mean;
    s2 += p[j] * std::exp(lambda * v[j] - shift) * d * d;
  }
  // phi(0) = 1 exactly, whatever rounding the probabilities carry.
  const double value = lambda == 0.0 ? 0.0 : shift + std::log(s0);
  return CgfPoint{lambda, value, mean, s2 / s0};
}

MixtureCgf::MixtureCgf(std::vector<LossClass> classes, std::vector<double> weights)
    : classes_(std::move(classes)), weights_(std::move(weights)) {
  if (classes_.size() != weights_.size()) throw ModelError("mixture: one weight per class required");
  if (classes_.empty()) throw ModelError("mixture: no classes");
}

MixtureCgf MixtureCgf::from_composition(std::span<const ClassCount> composition) {
  std::uint64_t n = 0;
  for (const auto& c : composition) n += c.count;
  if (n == 0) throw ModelError("mixture: empty composition");
  std::vector<LossClass> classes;
  std::vector<double> weights;
  for (const auto& c : composition) {
    classes.push_back(c.loss_class);
    weights.push_back(static_cast<double>(c.count) / static_cast<double>(n));
  }
  return MixtureCgf(std::move(classes), std::move(weights));
}

CgfPoint MixtureCgf::operator()(double lambda) const {
  CgfPoint out{lambda, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    const CgfPoint c = class_log_mgf(classes_[i], lambda);
    out.value += weights_[i] * c.value;
    out.d1 += weights_[i] * c.d1;
    out.d2 += weights_[i] * c.d2;
  }
  return out;
}

double MixtureCgf::upper_edge() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (weights_[i] > 0.0) acc += weights_[i] * classes_[i].max_value();
  }
  return acc;
}

double MixtureCgf::lower_edge() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (weights_[i] > 0.0) acc += weights_[i] * classes_[i].min_value();
  }
  return acc;
}

double MixtureCgf::upper_edge_rate() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (weights_[i] > 0.0) acc -= weights_[i] * std::log(classes_[i].prob_of_max());
  }
  return acc;
}

double MixtureCgf::lower_edge_rate() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (weights_[i] > 0.0) acc -= weights_[i] * std::log(classes_[i].prob_of_min());
  }
  return acc;
}

double MixtureCgf::max_abs() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (weights_[i] > 0.0) acc = std::max(acc, classes_[i].max_abs());
  }
  return acc;
}

MixtureCgf limit_mixture(const PortfolioModel& model) {
  const auto w = model.weights();
  return MixtureCgf({model.classes().begin(), model.classes().end()}, {w.begin(), w.end()});
}

MixtureCgf empirical_mixture(const PortfolioModel& model, std::uint64_t n) {
  if (n < 1) throw ModelError("empirical CGF needs n >= 1");
  const auto counts = model.counts(n);
  std::vector<double> weights(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    weights[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return MixtureCgf({model.classes().begin(), model.classes().end()}, std::move(weights));
}

CgfPoint limit_cgf(const PortfolioModel& model, double lambda) { return limit_mixture(model)(lambda); }

CgfPoint empirical_cgf(const PortfolioModel& model, std::uint64_t n, double lambda) {
  return empirical_mixture(model, n)(lambda);
}

std::array<double, 6> cumulants(const LossClass& cls) {
  std::array<double, 7> m{};  // raw moments m[0..6]
  const auto v = cls.support();
  const auto p = cls.probs();
  for (std::size_t j = 0; j < v.size(); ++j) {
    double power = 1.0;
    for (int k = 0; k <= 6; ++k) {
      m[k] += p[j] * power;
      power *= v[j];
    }
  }
  std::array<double, 7> kappa{};
  for (int order = 1; order <= 6; ++order) {
    double acc = m[order];
    double binom = 1.0;  // C(order-1, k-1)
    for (int k = 1; k < order; ++k) {
      acc -= binom * kappa[k] * m[order - k];
      binom = binom * (order - k) / k;
    }
    kappa[order] = acc;
  }
  return {kappa[1], kappa[2], kappa[3], kappa[4], kappa[5], kappa[6]};
}

}  // namespace lossdev
