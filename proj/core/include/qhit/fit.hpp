#pragma once

#include <cstddef>
#include <span>

namespace qhit {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope x. Needs two distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Fit of log y against log x over the pairs with x > 0 and y > floor.
LinearFit loglog_fit(std::span<const double> x, std::span<const double> y, double floor = 0.0);

/// Fit of log y against x over the pairs with y > floor.
LinearFit semilog_fit(std::span<const double> x, std::span<const double> y, double floor = 0.0);

struct TwoRegressorFit {
  double a = 0.0;
  double b = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// y = intercept + a u + b v.
TwoRegressorFit least_squares2(std::span<const double> u, std::span<const double> v, std::span<const double> y);

/// Polynomial-rate fit of a decaying sequence y(x), with a super-polynomial
/// flag raised when the log-log slope magnitude on the second half of the
/// points exceeds the first half's by more than `growth_threshold`.
struct DecayFit {
  double exponent = 0.0;  // minus the log-log slope over the whole range
  double first_half_slope = 0.0;
  double second_half_slope = 0.0;
  bool super_polynomial = false;
  double x_lo = 0.0;
  double x_hi = 0.0;
  std::size_t points = 0;
};

inline constexpr double kSuperPolynomialGrowth = 0.25;

DecayFit classify_decay(std::span<const double> x, std::span<const double> y, double floor = 0.0,
                        double growth_threshold = kSuperPolynomialGrowth);

}  // namespace qhit
