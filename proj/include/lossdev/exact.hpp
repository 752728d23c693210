// Exact finite-n law of the portfolio sum by lattice convolution.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lossdev/model.hpp"

namespace lossdev {

class IncommensurableLattice : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MemoryBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Masses of the points offset + j * step, j = 0..masses.size()-1.
struct LatticeDistribution {
  double offset = 0.0;
  double step = 1.0;
  std::vector<double> masses;

  double point(std::size_t j) const { return offset + static_cast<double>(j) * step; }
  double total_mass() const;
};

/// Largest g such that every support value is an integer multiple of g
/// (within `tolerance`, relative to max(1, |v|)). Throws
/// IncommensurableLattice when no such g with moderate multiples exists.
double latticize(std::span<const LossClass> classes, double tolerance = 1e-9);
double latticize(const PortfolioModel& model, double tolerance = 1e-9);

/// Default 2 GiB, overridden by the LOSSDEV_MEMORY_BUDGET environment
/// variable (bytes).
std::size_t default_memory_budget();

struct OracleOptions {
  std::size_t memory_budget = default_memory_budget();
};

enum class TailSide { at_least, greater_than };

enum class TailRoute { plain, tilted, edge, trivial };

struct TailProbability {
  double probability = 0.0;      // may underflow to 0 for very rare events
  double log_probability = 0.0;  // -infinity iff impossible
  bool impossible = false;
  TailRoute route = TailRoute::plain;
};

/// Law of S = sum of all contracts in the composition.
LatticeDistribution exact_distribution(std::span<const ClassCount> composition, const OracleOptions& options = {});

/// P[S/n >= x] (or > x) for the composition, n = total contract count.
TailProbability composition_tail(std::span<const ClassCount> composition, double x,
                                 TailSide side = TailSide::at_least, const OracleOptions& options = {});

/// P[M_n >= x] (or > x).
TailProbability exact_tail(const PortfolioModel& model, std::uint64_t n, double x,
                           TailSide side = TailSide::at_least, const OracleOptions& options = {});

/// P[M_n <= x], computed as an upper tail of the reflected classes.
TailProbability exact_lower_tail(const PortfolioModel& model, std::uint64_t n, double x,
                                 const OracleOptions& options = {});

/// (1/n) log P[M_n >= x]; -infinity marks an impossible event.
double exact_log_tail_rate(const PortfolioModel& model, std::uint64_t n, double x,
                           TailSide side = TailSide::at_least, const OracleOptions& options = {});

}  // namespace lossdev
