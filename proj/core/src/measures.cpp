#include "qhit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qhit/error.hpp"
#include "qhit/fit.hpp"

namespace qhit {

namespace {

std::size_t bin_of(double y, std::size_t m) noexcept {
  const double k = std::floor(y * static_cast<double>(m));
  if (k <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), m - 1);
}

}  // namespace

Ball::Ball(double c, double r) : center(c), radius(r) {
  if (!(c >= 0.0 && c <= 1.0)) throw ContractViolation("ball center must lie in [0, 1]");
  if (!(r > 0.0)) throw ContractViolation("ball radius must be positive");
}

Interval Ball::interval() const noexcept {
  return {std::max(0.0, center - radius), std::min(1.0, center + radius)};
}

double interval_mass(const DensityGrid& f, Interval J) {
  const double lo = std::clamp(J.lo, 0.0, 1.0);
  const double hi = std::clamp(J.hi, 0.0, 1.0);
  if (!(hi > lo)) return 0.0;
  const std::size_t m = f.bins();
  const double md = static_cast<double>(m);
  const std::size_t k = bin_of(lo, m);
  const std::size_t kh = bin_of(hi, m);
  if (k == kh) return (hi - lo) * f[k];
  const auto cdf = f.cdf();
  return (static_cast<double>(k + 1) / md - lo) * f[k] + (cdf[kh] - cdf[k + 1]) +
         (hi - static_cast<double>(kh) / md) * f[kh];
}

double ball_measure(const DensityGrid& f, const Ball& b) { return interval_mass(f, b.interval()); }

double sample_point(const DensityGrid& f, CounterRng& rng) {
  const double u = rng.uniform() * f.mass();
  const auto cdf = f.cdf();
  // Last bin with cdf[k] <= u and positive mass.
  auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), u);
  std::size_t k = static_cast<std::size_t>(it - cdf.begin()) - 1;
  k = std::min(k, f.bins() - 1);
  while (f[k] == 0.0 && k > 0) --k;
  const double w = f.bin_width();
  const double x = (static_cast<double>(k) + (u - cdf[k]) / (f[k] * w)) * w;
  return std::clamp(x, static_cast<double>(k) * w, static_cast<double>(k + 1) * w);
}

double conditional_sample(const DensityGrid& f, const Ball& b, CounterRng& rng) {
  const Interval J = b.interval();
  const double total = interval_mass(f, J);
  if (!(total > 0.0)) throw DomainError("conditional_sample: ball has zero mass");
  double target = rng.uniform() * total;
  const std::size_t m = f.bins();
  const double w = f.bin_width();
  std::size_t k = bin_of(J.lo, m);
  double lo = J.lo;
  // Walk bin by bin; balls are usually a few bins wide.
  for (;; ++k) {
    const double hi = std::min(J.hi, static_cast<double>(k + 1) * w);
    const double piece = (hi - lo) * f[k];
    if ((target < piece && f[k] > 0.0) || k + 1 >= m || hi >= J.hi) {
      if (f[k] > 0.0) return std::clamp(lo + target / f[k], J.lo, J.hi);
      return std::clamp(lo, J.lo, J.hi);
    }
    target -= piece;
    lo = hi;
  }
}

double annulus_ratio(const DensityGrid& f, const DensityGrid& denom, double x, double rho, double r) {
  if (!(r > 0.0 && r < rho)) throw ContractViolation("annulus_ratio: need 0 < r < rho");
  const double d = ball_measure(denom, Ball(x, rho));
  if (!(d > 0.0)) throw DomainError("annulus_ratio: zero denominator");
  const double left = interval_mass(f, {std::max(0.0, x - rho - r), std::max(0.0, x - rho + r)});
  const double right = interval_mass(f, {std::min(1.0, x + rho - r), std::min(1.0, x + rho + r)});
  return (left + right) / d;
}

double RatioRange::k_hat() const noexcept {
  if (!(min > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(max, 1.0 / min);
}

RatioRange k_ratio_audit(const DensityGrid& marginal, std::span<const DensityGrid> quenched, double x, double rho) {
  if (quenched.empty()) throw ContractViolation("k_ratio_audit: empty ensemble");
  const Ball b(x, rho);
  const double mu = ball_measure(marginal, b);
  if (!(mu > 0.0)) throw DomainError("k_ratio_audit: zero marginal mass");
  RatioRange out{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& q : quenched) {
    if (q.bins() != marginal.bins()) throw ContractViolation("k_ratio_audit: bin counts differ");
    const double mq = ball_measure(q, b);
    if (!(mq > 0.0)) throw DomainError("k_ratio_audit: zero quenched mass");
    const double ratio = mu / mq;
    out.min = std::min(out.min, ratio);
    out.max = std::max(out.max, ratio);
  }
  return out;
}

ScalingAudit scaling_audit(const DensityGrid& f, std::span<const double> centers, std::span<const double> rho_grid) {
  if (rho_grid.size() < 2) throw ContractViolation("scaling_audit: need at least two radii");
  const auto [lo_it, hi_it] = std::minmax_element(rho_grid.begin(), rho_grid.end());
  if (!(*lo_it > 0.0) || *hi_it / *lo_it < 100.0 * (1.0 - 1e-12))
    throw ContractViolation("scaling_audit: radius grid must span two decades");
  ScalingAudit out;
  out.rho_lo = *lo_it;
  out.rho_hi = *hi_it;
  std::vector<double> masses(rho_grid.size());
  for (double x : centers) {
    bool ok = true;
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
      masses[i] = ball_measure(f, Ball(x, rho_grid[i]));
      ok = ok && masses[i] > 0.0;
    }
    if (!ok) {
      ++out.excluded;
      continue;
    }
    out.slopes.push_back(loglog_fit(rho_grid, masses).slope);
  }
  if (out.slopes.empty()) throw DomainError("scaling_audit: every center has a zero-mass ball");
  std::vector<double> sorted = out.slopes;
  std::sort(sorted.begin(), sorted.end());
  out.min = sorted.front();
  out.max = sorted.back();
  const std::size_t n = sorted.size();
  out.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return out;
}

}  // namespace qhit
