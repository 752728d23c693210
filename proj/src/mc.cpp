#include "lossdev/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lossdev/cgf.hpp"
#include "lossdev/legendre.hpp"
#include "lossdev/philox.hpp"

namespace lossdev {

namespace {

// Replicates per reduction chunk. Fixed so the reduction order does not
// depend on the thread count.
constexpr std::uint64_t kChunk = 2048;

/// Running count/mean/M2, merged with Chan's pairwise update.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double delta = v - mean;
    mean += delta / count;
    m2 += delta * (v - mean);
  }

  void merge(const Moments& other) {
    if (other.count == 0.0) return;
    const double total = count + other.count;
    const double delta = other.mean - mean;
    mean += delta * other.count / total;
    m2 += other.m2 + delta * delta * count * other.count / total;
    count = total;
  }
};

struct PathSampler {
  std::vector<AliasTable> tables;
  std::vector<std::vector<double>> values;
  std::vector<std::uint64_t> counts;

  double sample_sum(PhiloxStream& stream) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < tables.size(); ++i) {
      const auto& table = tables[i];
      const auto& v = values[i];
      for (std::uint64_t c = 0; c < counts[i]; ++c) sum += v[table.sample(stream.next_uniform())];
    }
    return sum;
  }
};

PathSampler make_sampler(std::span<const ClassCount> composition) {
  PathSampler s;
  for (const auto& c : composition) {
    s.tables.emplace_back(c.loss_class.probs());
    s.values.emplace_back(c.loss_class.support().begin(), c.loss_class.support().end());
    s.counts.push_back(c.count);
  }
  return s;
}

/// Runs `samples` replicates of `score(stream)` and reduces them in chunk order.
template <typename Score>
Moments run_replicates(std::uint64_t samples, std::uint64_t seed, unsigned threads, const Score& score) {
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<Moments> partial(chunks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      Moments m;
      const std::uint64_t end = std::min(samples, (c + 1) * kChunk);
      for (std::uint64_t r = c * kChunk; r < end; ++r) {
        PhiloxStream stream(seed, r);
        m.add(score(stream));
      }
      partial[c] = m;
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  Moments total;
  for (const auto& m : partial) total.merge(m);
  return total;
}

double event_slack(double target) { return 1e-9 * std::max(1.0, std::abs(target)); }

bool in_event(double sum, double target, TailSide side) {
  return side == TailSide::at_least ? sum >= target - event_slack(target) : sum > target + event_slack(target);
}

double std_error_of(const Moments& m) {
  if (m.count < 2.0) return 0.0;
  return std::sqrt(std::max(0.0, m.m2 / (m.count - 1.0)) / m.count);
}

void check_samples(const McOptions& options) {
  if (options.samples < 1) throw McError("mc: at least one sample is required");
}

}  // namespace

const char* method_name(SamplingMethod method) { return method == SamplingMethod::plain ? "plain" : "tilted"; }

double TailEstimate::relative_std_error() const {
  return estimate > 0.0 ? std_error / estimate : std::numeric_limits<double>::infinity();
}

AliasTable::AliasTable(std::span<const double> probs) : threshold_(probs.size(), 1.0), alias_(probs.size()) {
  const std::size_t k = probs.size();
  if (k == 0) throw McError("alias table: empty law");
  double total = 0.0;
  for (double p : probs) total += p;
  std::vector<double> scaled(k);
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t j = 0; j < k; ++j) {
    scaled[j] = probs[j] / total * static_cast<double>(k);
    alias_[j] = j;
    (scaled[j] < 1.0 ? small : large).push_back(j);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t j : small) threshold_[j] = 1.0;
  for (std::size_t j : large) threshold_[j] = 1.0;
}

std::size_t AliasTable::sample(double u) const {
  const double scaled = u * static_cast<double>(threshold_.size());
  const std::size_t j = std::min(static_cast<std::size_t>(scaled), threshold_.size() - 1);
  return scaled - static_cast<double>(j) < threshold_[j] ? j : alias_[j];
}

LossClass tilted_class(const LossClass& cls, double lambda) {
  const auto v = cls.support();
  const auto p = cls.probs();
  const double log_mgf = class_log_mgf(cls, lambda).value;
  std::vector<double> q(v.size());
  double total = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    q[j] = p[j] * std::exp(lambda * v[j] - log_mgf);
    total += q[j];
  }
  for (double& w : q) w /= total;
  return LossClass::make(cls.name(), {v.begin(), v.end()}, std::move(q));
}

double log_likelihood_ratio(std::span<const ClassCount> composition, double path_sum, double lambda) {
  double acc = -lambda * path_sum;
  for (const auto& c : composition) acc += static_cast<double>(c.count) * class_log_mgf(c.loss_class, lambda).value;
  return acc;
}

TailEstimate sample_plain(const PortfolioModel& model, std::uint64_t n, double x, const McOptions& options) {
  check_samples(options);
  if (n < 1) throw McError("mc: n must be >= 1");
  const auto comp = model.composition(n);
  const PathSampler sampler = make_sampler(comp);
  const double target = static_cast<double>(n) * x;
  const Moments m = run_replicates(options.samples, options.seed, options.threads, [&](PhiloxStream& s) {
    return in_event(sampler.sample_sum(s), target, options.side) ? 1.0 : 0.0;
  });
  TailEstimate out;
  out.estimate = m.mean;
  out.std_error = std_error_of(m);
  out.log_estimate = std::log(m.mean);
  out.n_samples = options.samples;
  out.method = SamplingMethod::plain;
  out.seed = options.seed;
  return out;
}

TailEstimate sample_tilted(const PortfolioModel& model, std::uint64_t n, double x, const McOptions& options) {
  check_samples(options);
  if (n < 1) throw McError("mc: n must be >= 1");
  const auto comp = model.composition(n);
  const RatePoint rp = legendre_transform(MixtureCgf::from_composition(comp), x);
  if (rp.status != RateStatus::interior) {
    throw McError(std::string("mc: threshold is a ") + status_name(rp.status) +
                  " point of the rate function; tilting is undefined there, use plain sampling or the exact oracle");
  }
  const double lambda = rp.lambda_star;

  std::vector<ClassCount> tilted;
  for (const auto& c : comp) tilted.push_back(ClassCount{tilted_class(c.loss_class, lambda), c.count});
  const PathSampler sampler = make_sampler(tilted);

  const double target = static_cast<double>(n) * x;
  // weight = exp(-lambda (S - target)) * exp(log_scale) on the event.
  const double log_scale = log_likelihood_ratio(comp, target, lambda);
  const Moments m = run_replicates(options.samples, options.seed, options.threads, [&](PhiloxStream& s) {
    const double sum = sampler.sample_sum(s);
    return in_event(sum, target, options.side) ? std::exp(-lambda * (sum - target)) : 0.0;
  });
  TailEstimate out;
  out.log_estimate = std::log(m.mean) + log_scale;
  out.estimate = std::exp(out.log_estimate);
  out.std_error = std_error_of(m) * std::exp(log_scale);
  out.n_samples = options.samples;
  out.method = SamplingMethod::tilted;
  out.lambda = lambda;
  out.seed = options.seed;
  return out;
}

}  // namespace lossdev
