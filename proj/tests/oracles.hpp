// Independent reference computations and random model generators for tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "lossdev/model.hpp"

namespace oracle {

using lossdev::AssumptionBounds;
using lossdev::LossClass;
using lossdev::PortfolioModel;

/// Class of each of the first n contracts, in index order.
inline std::vector<LossClass> contracts(const PortfolioModel& model, std::uint64_t n) {
  std::vector<LossClass> out;
  const auto counts = model.counts(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::uint64_t k = 0; k < counts[i]; ++k) out.push_back(model.classes()[i]);
  }
  return out;
}

/// P[sum >= n x] (or > n x) by walking every outcome of the product measure.
inline double enumerate_tail(const std::vector<LossClass>& cs, double x, bool strict = false) {
  const double nx = static_cast<double>(cs.size()) * x;
  const double slack = 1e-9 * std::max(1.0, std::abs(nx));
  double total = 0.0;
  std::function<void(std::size_t, double, double)> walk = [&](std::size_t k, double sum, double prob) {
    if (k == cs.size()) {
      const bool hit = strict ? sum > nx + slack : sum >= nx - slack;
      if (hit) total += prob;
      return;
    }
    const auto& c = cs[k];
    for (std::size_t j = 0; j < c.size(); ++j) walk(k + 1, sum + c.support()[j], prob * c.probs()[j]);
  };
  walk(0, 0.0, 1.0);
  return total;
}

/// log of sum_j p_j exp(lambda v_j), computed naively.
inline double naive_log_mgf(const LossClass& c, double lambda) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += c.probs()[j] * std::exp(lambda * c.support()[j]);
  return std::log(s);
}

template <class F>
double central_diff(F f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2 * h);
}

template <class F>
double central_diff2(F f, double t, double h) {
  return (f(t + h) - 2 * f(t) + f(t - h)) / (h * h);
}

/// Random centered classes on the lattice 0.25 Z, bounded by c0.
struct ModelGen {
  std::mt19937_64 rng;

  explicit ModelGen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  /// Points a < 0 < b (and optionally 0) with masses that make the mean vanish.
  LossClass lattice_class(const std::string& name, double c0) {
    const int top = static_cast<int>(std::floor(c0 / 0.25));
    const double a = -0.25 * integer(1, top);
    const double b = 0.25 * integer(1, top);
    const double q = integer(0, 1) ? uniform(0.05, 0.5) : 0.0;
    const double pa = (1 - q) * b / (b - a);
    const double pb = (1 - q) - pa;
    if (q > 0) return LossClass::make(name, {a, 0.0, b}, {pa, q, pb});
    return LossClass::make(name, {a, b}, {pa, pb});
  }

  /// Continuous supports, centered at construction.
  LossClass real_class(const std::string& name, double c0) {
    const int k = integer(2, 5);
    std::vector<double> v(k), p(k);
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      v[j] = uniform(-c0 / 2, c0 / 2);
      p[j] = uniform(0.1, 1.0);
      total += p[j];
    }
    for (auto& pj : p) pj /= total;
    return LossClass::make(name, v, p, true);
  }

  std::vector<LossClass> lattice_classes(int count, double c0) {
    std::vector<LossClass> out;
    for (int i = 0; i < count; ++i) out.push_back(lattice_class("C" + std::to_string(i + 1), c0));
    return out;
  }

  std::vector<double> weights(std::size_t count) {
    std::vector<double> w(count);
    double total = 0.0;
    for (auto& x : w) total += (x = uniform(0.1, 1.0));
    for (auto& x : w) x /= total;
    return w;
  }

  /// Weighted or round-robin model on the 0.25 lattice.
  PortfolioModel lattice_model(double c0 = 2.0) {
    auto classes = lattice_classes(integer(1, 3), c0);
    if (integer(0, 1)) {
      std::vector<std::uint64_t> w;
      for (std::size_t i = 0; i < classes.size(); ++i) w.push_back(static_cast<std::uint64_t>(integer(1, 3)));
      return PortfolioModel::assigned(std::move(classes), lossdev::AssignmentRule::round_robin(w));
    }
    const auto w = weights(classes.size());
    return PortfolioModel::weighted(std::move(classes), w);
  }

  PortfolioModel real_model(double c0 = 2.0) {
    std::vector<LossClass> classes;
    const int count = integer(1, 3);
    for (int i = 0; i < count; ++i) classes.push_back(real_class("R" + std::to_string(i + 1), c0));
    const auto w = weights(classes.size());
    return PortfolioModel::weighted(std::move(classes), w);
  }
};

/// Tightest bounds the model satisfies.
inline AssumptionBounds tight_bounds(const PortfolioModel& model) {
  double c0 = 0.0;
  double c1 = 1e300;
  for (const auto& c : model.classes()) {
    c0 = std::max(c0, c.max_abs());
    c1 = std::min(c1, c.variance());
  }
  return AssumptionBounds::make(c0, c1);
}

}  // namespace oracle
