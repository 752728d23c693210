#include "lossdev/exact.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "lossdev/cgf.hpp"
#include "lossdev/legendre.hpp"

namespace lossdev {

namespace {

// Largest admissible |v| / step; beyond this the supports count as incommensurable.
constexpr double kMaxMultiple = 1e7;
// Edge masses below this are dropped from the active range.
constexpr double kTrim = 1e-300;
// Plain tails below this are recomputed under an exponential tilt.
constexpr double kPlainFloor = 1e-250;

struct NeumaierSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      compensation += (sum - t) + v;
    } else {
      compensation += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + compensation; }
};

double real_gcd(double a, double b, double eps) {
  if (a < b) std::swap(a, b);
  while (b > eps) {
    double r = std::fmod(a, b);
    if (b - r <= eps) r = 0.0;
    a = b;
    b = r;
  }
  return a;
}

/// One class mapped onto the common lattice: value = step * (base + shift[j]).
struct Kernel {
  std::int64_t base = 0;
  std::size_t width = 0;
  std::vector<std::size_t> shift;
  std::vector<double> prob;
  LossClass snapped;  // class with support values rounded onto the lattice
  std::uint64_t count = 0;
};

std::vector<Kernel> make_kernels(std::span<const ClassCount> composition, double step) {
  std::vector<Kernel> out;
  for (const auto& cc : composition) {
    if (cc.count == 0) continue;
    std::vector<double> snapped;
    for (double v : cc.loss_class.support()) snapped.push_back(static_cast<double>(std::llround(v / step)) * step);
    const auto p = cc.loss_class.probs();
    Kernel k{0, 0, {}, {}, LossClass::make(cc.loss_class.name(), std::move(snapped), {p.begin(), p.end()}), cc.count};
    const auto v = k.snapped.support();
    std::vector<std::int64_t> idx(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) idx[j] = std::llround(v[j] / step);
    k.base = idx.front();
    k.width = static_cast<std::size_t>(idx.back() - idx.front());
    for (std::size_t j = 0; j < v.size(); ++j) k.shift.push_back(static_cast<std::size_t>(idx[j] - k.base));
    const auto q = k.snapped.probs();
    k.prob.assign(q.begin(), q.end());
    out.push_back(std::move(k));
  }
  return out;
}

void tilt_kernels(std::vector<Kernel>& kernels, double lambda) {
  for (auto& k : kernels) {
    const auto v = k.snapped.support();
    const auto p = k.snapped.probs();
    const double log_mgf = class_log_mgf(k.snapped, lambda).value;
    for (std::size_t j = 0; j < v.size(); ++j) k.prob[j] = p[j] * std::exp(lambda * v[j] - log_mgf);
  }
}

struct Convolution {
  std::vector<double> masses;
  std::size_t lo = 0;
  std::size_t hi = 0;
};

std::size_t total_span(const std::vector<Kernel>& kernels) {
  long double span = 0.0L;
  for (const auto& k : kernels) span += static_cast<long double>(k.width) * static_cast<long double>(k.count);
  if (span > 1e15L) throw MemoryBudgetExceeded("exact: lattice span too large");
  return static_cast<std::size_t>(span);
}

Convolution convolve_all(const std::vector<Kernel>& kernels, const OracleOptions& options) {
  const std::size_t span = total_span(kernels);
  const std::size_t size = span + 1;
  const long double bytes = 2.0L * static_cast<long double>(size) * sizeof(double);
  if (bytes > static_cast<long double>(options.memory_budget)) {
    throw MemoryBudgetExceeded("exact: lattice of " + std::to_string(size) + " points needs " +
                               std::to_string(static_cast<unsigned long long>(bytes)) +
                               " bytes, over the memory budget of " + std::to_string(options.memory_budget));
  }
  std::vector<double> cur(size, 0.0);
  std::vector<double> next(size, 0.0);
  cur[0] = 1.0;
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (const auto& k : kernels) {
    for (std::uint64_t rep = 0; rep < k.count; ++rep) {
      const std::size_t new_hi = hi + k.width;
      std::fill(next.begin() + static_cast<long>(lo), next.begin() + static_cast<long>(new_hi) + 1, 0.0);
      for (std::size_t j = 0; j < k.shift.size(); ++j) {
        const double p = k.prob[j];
        double* dst = next.data() + lo + k.shift[j];
        const double* src = cur.data() + lo;
        const std::size_t len = hi - lo + 1;
        for (std::size_t i = 0; i < len; ++i) dst[i] += p * src[i];
      }
      hi = new_hi;
      std::swap(cur, next);
      while (lo < hi && cur[lo] < kTrim) cur[lo++] = 0.0;
      while (hi > lo && cur[hi] < kTrim) cur[hi--] = 0.0;
    }
  }
  // Clear anything outside the active range left over from buffer swaps.
  std::fill(cur.begin(), cur.begin() + static_cast<long>(lo), 0.0);
  std::fill(cur.begin() + static_cast<long>(hi) + 1, cur.end(), 0.0);
  return Convolution{std::move(cur), lo, hi};
}

std::vector<LossClass> classes_of(std::span<const ClassCount> composition) {
  std::vector<LossClass> out;
  for (const auto& c : composition) out.push_back(c.loss_class);
  return out;
}

}  // namespace

double LatticeDistribution::total_mass() const {
  NeumaierSum acc;
  for (double m : masses) acc.add(m);
  return acc.value();
}

double latticize(std::span<const LossClass> classes, double tolerance) {
  double scale = 0.0;
  for (const auto& c : classes) scale = std::max(scale, c.max_abs());
  if (scale == 0.0) return 1.0;
  const double eps = tolerance * std::max(1.0, scale);

  double g = 0.0;
  for (const auto& c : classes) {
    for (double v : c.support()) {
      const double a = std::abs(v);
      if (a <= eps) continue;
      g = g == 0.0 ? a : real_gcd(g, a, eps);
    }
  }
  if (g == 0.0) return 1.0;
  for (const auto& c : classes) {
    for (double v : c.support()) {
      const double q = v / g;
      if (std::abs(q) > kMaxMultiple ||
          std::abs(q - std::round(q)) * g > tolerance * std::max(1.0, std::abs(v))) {
        throw IncommensurableLattice(
            "supports are not commensurable on a common lattice (tolerance " + std::to_string(tolerance) +
            "); use the Monte Carlo estimators instead");
      }
    }
  }
  return g;
}

double latticize(const PortfolioModel& model, double tolerance) { return latticize(model.classes(), tolerance); }

std::size_t default_memory_budget() {
  std::size_t budget = std::size_t{2} << 30;
  if (const char* env = std::getenv("LOSSDEV_MEMORY_BUDGET")) {
    std::size_t parsed = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, parsed);
    if (ec == std::errc() && ptr == end && parsed > 0) budget = parsed;
  }
  return budget;
}

LatticeDistribution exact_distribution(std::span<const ClassCount> composition, const OracleOptions& options) {
  const auto classes = classes_of(composition);
  const double step = latticize(classes);
  const auto kernels = make_kernels(composition, step);
  std::int64_t base = 0;
  for (const auto& k : kernels) base += k.base * static_cast<std::int64_t>(k.count);
  auto conv = convolve_all(kernels, options);
  return LatticeDistribution{static_cast<double>(base) * step, step, std::move(conv.masses)};
}

TailProbability composition_tail(std::span<const ClassCount> composition, double x, TailSide side,
                                 const OracleOptions& options) {
  std::uint64_t n = 0;
  for (const auto& c : composition) n += c.count;
  if (n == 0) throw ModelError("exact: empty portfolio");

  const auto classes = classes_of(composition);
  const double step = latticize(classes);
  auto kernels = make_kernels(composition, step);
  std::int64_t base = 0;
  for (const auto& k : kernels) base += k.base * static_cast<std::int64_t>(k.count);
  const std::size_t span = total_span(kernels);

  // Lattice index of the first point that belongs to the event.
  const double u = static_cast<double>(n) * x / step - static_cast<double>(base);
  const double t_real = side == TailSide::at_least ? std::ceil(u - 1e-9) : std::floor(u + 1e-9) + 1.0;
  if (t_real <= 0.0) return TailProbability{1.0, 0.0, false, TailRoute::trivial};
  if (t_real > static_cast<double>(span)) {
    return TailProbability{0.0, -kInfinity, true, TailRoute::edge};
  }
  const auto t = static_cast<std::size_t>(t_real);
  if (t == span) {
    double log_p = 0.0;
    for (const auto& k : kernels) log_p += static_cast<double>(k.count) * std::log(k.snapped.prob_of_max());
    return TailProbability{std::exp(log_p), log_p, false, TailRoute::edge};
  }

  std::vector<ClassCount> snapped;
  for (const auto& k : kernels) snapped.push_back(ClassCount{k.snapped, k.count});
  const MixtureCgf mixture = MixtureCgf::from_composition(snapped);
  const double threshold_value = step * (static_cast<double>(base) + static_cast<double>(t));
  const RatePoint chernoff = legendre_transform(mixture, threshold_value / static_cast<double>(n));
  const double log_bound = -static_cast<double>(n) * chernoff.rate;

  // Below the mean (lambda* <= 0) the tail is not small and tilting would amplify.
  if (chernoff.lambda_star <= 0.0 || log_bound > std::log(kPlainFloor)) {
    const auto conv = convolve_all(kernels, options);
    NeumaierSum tail;
    for (std::size_t j = std::max(t, conv.lo); j <= conv.hi; ++j) tail.add(conv.masses[j]);
    const double p = std::min(1.0, tail.value());
    if (p >= kPlainFloor || chernoff.lambda_star <= 0.0) {
      return TailProbability{p, std::log(p), false, TailRoute::plain};
    }
  }

  // P[S >= s_t] = exp(-lambda s_t + sum log phi) * E~[exp(-lambda (S - s_t)); S >= s_t]
  const double lambda = chernoff.lambda_star;
  tilt_kernels(kernels, lambda);
  const auto conv = convolve_all(kernels, options);
  NeumaierSum tail;
  for (std::size_t j = std::max(t, conv.lo); j <= conv.hi; ++j) {
    tail.add(conv.masses[j] * std::exp(-lambda * step * static_cast<double>(j - t)));
  }
  double log_mgf_total = 0.0;
  for (const auto& k : kernels) {
    log_mgf_total += static_cast<double>(k.count) * class_log_mgf(k.snapped, lambda).value;
  }
  const double log_p = std::log(tail.value()) - lambda * threshold_value + log_mgf_total;
  return TailProbability{std::exp(log_p), log_p, false, TailRoute::tilted};
}

TailProbability exact_tail(const PortfolioModel& model, std::uint64_t n, double x, TailSide side,
                           const OracleOptions& options) {
  if (n < 1) throw ModelError("exact: n must be >= 1");
  const auto comp = model.composition(n);
  return composition_tail(comp, x, side, options);
}

TailProbability exact_lower_tail(const PortfolioModel& model, std::uint64_t n, double x,
                                 const OracleOptions& options) {
  if (n < 1) throw ModelError("exact: n must be >= 1");
  auto comp = model.composition(n);
  for (auto& c : comp) c.loss_class = c.loss_class.reflected();
  return composition_tail(comp, -x, TailSide::at_least, options);
}

double exact_log_tail_rate(const PortfolioModel& model, std::uint64_t n, double x, TailSide side,
                           const OracleOptions& options) {
  const auto tail = exact_tail(model, n, x, side, options);
  return tail.log_probability / static_cast<double>(n);
}

}  // namespace lossdev
