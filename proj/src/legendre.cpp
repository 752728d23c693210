#include "lossdev/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace lossdev {

namespace {

constexpr int kMaxIterations = 200;
constexpr int kMaxDoublings = 80;

double solve_tolerance(double x) { return 1e-10 * std::max(1.0, std::abs(x)); }

}  // namespace

const char* status_name(RateStatus status) {
  switch (status) {
    case RateStatus::interior: return "interior";
    case RateStatus::boundary: return "boundary";
    case RateStatus::infinite: return "infinite";
  }
  return "unknown";
}

RatePoint legendre_transform(const MixtureCgf& cgf, double x) {
  const double upper = cgf.upper_edge();
  const double lower = cgf.lower_edge();
  if (x > upper) return RatePoint{x, kInfinity, kInfinity, RateStatus::infinite};
  if (x < lower) return RatePoint{x, -kInfinity, kInfinity, RateStatus::infinite};
  if (x == upper) return RatePoint{x, kInfinity, cgf.upper_edge_rate(), RateStatus::boundary};
  if (x == lower) return RatePoint{x, -kInfinity, cgf.lower_edge_rate(), RateStatus::boundary};

  const double tol = solve_tolerance(x);
  const double scale = 1.0 / std::max(cgf.max_abs(), 1e-300);

  CgfPoint at = cgf(0.0);
  double f = at.d1 - x;

  // Bracket the root of the increasing function Lambda'(lambda) - x.
  double lo = 0.0;
  double hi = 0.0;
  if (f < 0.0) {
    hi = scale;
    for (int k = 0;; ++k) {
      const CgfPoint p = cgf(hi);
      if (p.d1 - x >= 0.0) break;
      if (std::abs(p.d1 - x) <= tol && k >= kMaxDoublings) {
        return RatePoint{x, hi, std::max(0.0, hi * x - p.value), RateStatus::interior};
      }
      if (k >= kMaxDoublings) throw SolverError("legendre: could not bracket Lambda'(lambda) = x");
      lo = hi;
      hi *= 2.0;
    }
  } else if (f > 0.0) {
    lo = -scale;
    for (int k = 0;; ++k) {
      const CgfPoint p = cgf(lo);
      if (p.d1 - x <= 0.0) break;
      if (std::abs(p.d1 - x) <= tol && k >= kMaxDoublings) {
        return RatePoint{x, lo, std::max(0.0, lo * x - p.value), RateStatus::interior};
      }
      if (k >= kMaxDoublings) throw SolverError("legendre: could not bracket Lambda'(lambda) = x");
      hi = lo;
      lo *= 2.0;
    }
  } else {
    return RatePoint{x, 0.0, std::max(0.0, -at.value), RateStatus::interior};
  }

  // Newton with bisection fallback; a final Newton step polishes the root.
  double lambda = std::clamp(-f / std::max(at.d2, 1e-300), lo, hi);
  bool converged = false;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    at = cgf(lambda);
    f = at.d1 - x;
    if (f < 0.0) {
      lo = lambda;
    } else {
      hi = lambda;
    }
    if (std::abs(f) <= tol) {
      converged = true;
      break;
    }
    const double newton = at.d2 > 0.0 ? lambda - f / at.d2 : lo - 1.0;
    lambda = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lambda))) {
      at = cgf(lambda);
      f = at.d1 - x;
      converged = std::abs(f) <= tol;
      break;
    }
  }
  if (!converged) {
    throw SolverError("legendre: no convergence at x = " + std::to_string(x));
  }
  if (at.d2 > 0.0) {
    const double polished = lambda - f / at.d2;
    if (polished >= lo && polished <= hi) {
      const CgfPoint p = cgf(polished);
      if (std::abs(p.d1 - x) <= std::abs(f)) {
        lambda = polished;
        at = p;
      }
    }
  }
  return RatePoint{x, lambda, std::max(0.0, lambda * x - at.value), RateStatus::interior};
}

RatePoint legendre_transform(const PortfolioModel& model, double x) {
  return legendre_transform(limit_mixture(model), x);
}

RatePoint chernoff_rate(const PortfolioModel& model, std::uint64_t n, double x) {
  return legendre_transform(empirical_mixture(model, n), x);
}

namespace {

// log 2 + a log a + b log b with a = (1+h)/2, b = (1-h)/2. The atanh form
// keeps full relative accuracy as h -> 0, where the two log1p terms of the
// textbook form cancel.
template <class Real>
Real coin_rate(Real h) {
  return h * std::atanh(h) + Real(0.5) * std::log1p(-h * h);
}

}  // namespace

double rate_I1(double x) {
  if (!(std::abs(x) <= 1.0)) return kInfinity;
  if (std::abs(x) == 1.0) return std::log(2.0);
  return coin_rate(x);
}

double rate_I2(double x) {
  if (!(std::abs(x) <= 2.0)) return kInfinity;
  if (std::abs(x) == 2.0) return std::log(2.0);
  return coin_rate(0.5 * x);
}

double rate_closed_form(int which, double x) {
  if (which == 1) return rate_I1(x);
  if (which == 2) return rate_I2(x);
  throw std::invalid_argument("closed-form rate: which must be 1 or 2");
}

std::array<double, 3> taylor_coefficients(int which) {
  if (which == 1) return {1.0 / 2.0, 1.0 / 12.0, 1.0 / 30.0};
  if (which == 2) return {1.0 / 8.0, 1.0 / 192.0, 1.0 / 1920.0};
  throw std::invalid_argument("taylor_coefficients: which must be 1 or 2");
}

double rate_expansion_check(int which, std::span<const double> grid) {
  const auto c = taylor_coefficients(which);
  double worst = 0.0;
  for (double x : grid) {
    if (!(x > 0.0 && x <= 0.2)) throw std::invalid_argument("rate_expansion_check: grid must lie in (0, 0.2]");
    // The residual is ~x^8 against a value ~x^2, so it is formed in extended precision.
    const long double h = which == 1 ? x : 0.5L * x;
    const long double x2 = static_cast<long double>(x) * x;
    const long double poly = x2 * (c[0] + x2 * (c[1] + x2 * static_cast<long double>(c[2])));
    const long double residual = std::abs(coin_rate(h) - poly) / (x2 * x2 * x2 * x2);
    worst = std::max(worst, static_cast<double>(residual));
  }
  return worst;
}

UpperBoundEstimate rate_upper_bound(const PortfolioModel& model, double x, std::span<const double> lambda_grid,
                                    std::span<const std::uint64_t> checkpoints) {
  if (lambda_grid.empty()) throw std::invalid_argument("rate_upper_bound: empty lambda grid");
  if (checkpoints.empty()) throw std::invalid_argument("rate_upper_bound: no checkpoints");
  if (!(x > 0.0)) throw std::invalid_argument("rate_upper_bound: x must be positive");

  std::vector<MixtureCgf> sections;
  sections.reserve(checkpoints.size());
  for (auto n : checkpoints) sections.push_back(empirical_mixture(model, n));

  UpperBoundEstimate out{x, -kInfinity, 0.0};
  for (double lambda : lambda_grid) {
    double limsup = -kInfinity;
    for (const auto& s : sections) limsup = std::max(limsup, s(lambda).value);
    const double candidate = lambda * x - limsup;
    if (candidate > out.value) {
      out.value = candidate;
      out.lambda_argmax = lambda;
    }
  }
  return out;
}

}  // namespace lossdev
