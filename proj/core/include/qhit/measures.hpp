#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qhit/interval_maps.hpp"
#include "qhit/random.hpp"
#include "qhit/transfer.hpp"

namespace qhit {

/// Metric ball B_rho(x) clipped to [0, 1] (no wrap-around).
struct Ball {
  double center = 0.5;
  double radius = 0.0;

  /// Throws ContractViolation unless center is in [0, 1] and radius > 0.
  Ball(double center, double radius);

  Interval interval() const noexcept;
  bool contains(double x) const noexcept { return interval().contains(x); }
};

/// Integral of f over [lo, hi] intersected with [0, 1]; linear inside each bin.
double interval_mass(const DensityGrid& f, Interval J);
double ball_measure(const DensityGrid& f, const Ball& b);

/// Inverse-CDF sample of f from one uniform draw of `rng`.
double sample_point(const DensityGrid& f, CounterRng& rng);

/// Inverse-CDF sample of f restricted to b. Throws DomainError if f(b) = 0.
double conditional_sample(const DensityGrid& f, const Ball& b, CounterRng& rng);

/// f(B_{rho+r}(x) \ B_{rho-r}(x)) / denom(B_rho(x)). Requires 0 < r < rho.
double annulus_ratio(const DensityGrid& f, const DensityGrid& denom, double x, double rho, double r);

struct RatioRange {
  double min = 0.0;
  double max = 0.0;
  /// max(max, 1 / min).
  double k_hat() const noexcept;
};

/// Extremes of marginal(B) / quenched_i(B) over the ensemble.
RatioRange k_ratio_audit(const DensityGrid& marginal, std::span<const DensityGrid> quenched, double x, double rho);

struct ScalingAudit {
  std::vector<double> slopes;  // one per center that kept positive mass on the whole grid
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t excluded = 0;  // centers dropped for a zero-mass ball
  double rho_lo = 0.0;
  double rho_hi = 0.0;
};

/// Per-center least-squares slope of log f(B_rho(x)) against log rho.
/// The grid must span at least two decades.
ScalingAudit scaling_audit(const DensityGrid& f, std::span<const double> centers, std::span<const double> rho_grid);

}  // namespace qhit
