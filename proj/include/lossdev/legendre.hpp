// Fenchel-Legendre transforms of cumulant generating functions.
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

#include "lossdev/cgf.hpp"

namespace lossdev {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RateStatus { interior, boundary, infinite };

const char* status_name(RateStatus status);

/// Solution of sup_lambda (lambda x - Lambda(lambda)).
///
/// For boundary and infinite points lambda_star is +-kInfinity (the
/// supremum is only approached as lambda diverges); for infinite points the
/// rate is kInfinity as well. Always test `status`, not the numbers.
struct RatePoint {
  double x = 0.0;
  double lambda_star = 0.0;
  double rate = 0.0;
  RateStatus status = RateStatus::interior;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Safeguarded Newton iteration on Lambda'(lambda) = x.
RatePoint legendre_transform(const MixtureCgf& cgf, double x);

/// Transform of the limit CGF of a weighted model.
RatePoint legendre_transform(const PortfolioModel& model, double x);

/// sup_lambda (lambda x - empirical_cgf(n, lambda)), the exponent of the
/// finite-n Chernoff bound P[M_n >= x] <= exp(-n * rate).
RatePoint chernoff_rate(const PortfolioModel& model, std::uint64_t n, double x);

/// Cramer rate of the symmetric two-point law on {-1, 1}; kInfinity off [-1, 1].
double rate_I1(double x);

/// Cramer rate of the symmetric two-point law on {-2, 2}; kInfinity off [-2, 2].
double rate_I2(double x);

/// rate_I1 for which == 1, rate_I2 for which == 2.
double rate_closed_form(int which, double x);

/// Coefficients of x^2, x^4, x^6 in the small-x expansion of the closed forms.
std::array<double, 3> taylor_coefficients(int which);

/// max over the grid of |I(x) - P6(x)| / x^8, with P6 the degree-6 Taylor polynomial.
double rate_expansion_check(int which, std::span<const double> grid);

struct UpperBoundEstimate {
  double x = 0.0;
  double value = 0.0;         // sup over the grid of lambda x - max_n Lambda_n(lambda)
  double lambda_argmax = 0.0;
};

/// Grid estimate of the transform of the limsup CGF. The limsup is replaced
/// by a max of empirical CGFs over `checkpoints`, and the sup by a max over
/// `lambda_grid`; both make the result a lower estimate of the exponent.
UpperBoundEstimate rate_upper_bound(const PortfolioModel& model, double x, std::span<const double> lambda_grid,
                                    std::span<const std::uint64_t> checkpoints);

}  // namespace lossdev
