#include "qhit/short_returns.hpp"

#include <cmath>
#include <string>

#include "qhit/error.hpp"
#include "qhit/fit.hpp"
#include "qhit/measures.hpp"
#include "qhit/parallel.hpp"
#include "qhit/random.hpp"

namespace qhit {

double ShortReturnConfig::default_a(const MapSystem& system) {
  return 1.0 / (4.0 * std::log(expansion_constant(system)));
}

ShortReturnConfig ShortReturnConfig::with_default_a(const MapSystem& system, std::vector<double> rho_grid) {
  ShortReturnConfig cfg;
  cfg.a = default_a(system);
  cfg.rho_grid = std::move(rho_grid);
  return cfg;
}

void ShortReturnConfig::validate() const {
  if (!(a > 0.0)) throw ContractViolation("short returns: a must be positive");
  if (!(b > 0.0 && b < 1.0)) throw ContractViolation("short returns: b must lie in (0, 1)");
  if (n_centers == 0) throw ContractViolation("short returns: n_centers must be at least 1");
  if (rho_grid.empty()) throw ContractViolation("short returns: rho grid is empty");
  for (double rho : rho_grid) {
    if (!(rho > 0.0 && rho < 0.5)) throw ContractViolation("short returns: rho must lie in (0, 1/2)");
    if (short_return_horizon(a, rho) < 1)
      throw ContractViolation("short returns: J(rho) = floor(a |log rho|) is 0 at rho = " + std::to_string(rho));
  }
}

std::size_t short_return_horizon(double a, double rho) {
  const double j = std::floor(a * std::abs(std::log(rho)));
  return j <= 0.0 ? 0 : static_cast<std::size_t>(j);
}

bool short_return_indicator(const MapSystem& system, const Realisation& omega, double x, double rho, std::size_t J) {
  if (J <= 1) return false;
  const Interval B = Ball(x, rho).interval();
  IntervalUnion image({B});
  for (std::size_t n = 1; n < J; ++n) {
    image = image_under(system.map(omega.symbol_at(static_cast<std::int64_t>(n - 1))), image);
    if (image.intersects(B)) return true;
  }
  return false;
}

bool level_set_indicator(const MapSystem& system, const Realisation& omega, double x, double rho, std::size_t n) {
  if (n == 0) throw ContractViolation("level set: n must be at least 1");
  const Interval B = Ball(x, rho).interval();
  return image_of_interval(system, omega, n, B).intersects(B);
}

namespace {

Estimate bernoulli_estimate(const std::vector<char>& hits) {
  Estimate e;
  e.n_centers = hits.size();
  double k = 0.0;
  for (char h : hits) k += h;
  const double n = static_cast<double>(hits.size());
  e.value = k / n;
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / n);
  return e;
}

std::vector<double> draw_centers(const DensityGrid& f, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ContractViolation("short returns: n_centers must be at least 1");
  std::vector<double> centers(n);
  const CounterRng base(seed);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng = base.substream(i);
    centers[i] = sample_point(f, rng);
  }
  return centers;
}

}  // namespace

Estimate level_set_measure(const MapSystem& system, const Realisation& omega, std::size_t n, double rho,
                           const DensityGrid& f, std::size_t n_centers, std::uint64_t seed, std::size_t threads) {
  const auto centers = draw_centers(f, n_centers, seed);
  std::vector<char> hits(n_centers);
  parallel_for(n_centers, threads,
               [&](std::size_t i) { hits[i] = level_set_indicator(system, omega, centers[i], rho, n); });
  return bernoulli_estimate(hits);
}

Estimate very_short_set_measure(const MapSystem& system, const Realisation& omega, double rho,
                                const ShortReturnConfig& cfg, const DensityGrid& f) {
  if (cfg.n_centers == 0) throw ContractViolation("short returns: n_centers must be at least 1");
  const std::size_t J = short_return_horizon(cfg.a, rho);
  const auto centers = draw_centers(f, cfg.n_centers, cfg.seed);
  std::vector<char> hits(cfg.n_centers);
  parallel_for(cfg.n_centers, cfg.threads,
               [&](std::size_t i) { hits[i] = short_return_indicator(system, omega, centers[i], rho, J); });
  return bernoulli_estimate(hits);
}

std::vector<Estimate> short_return_profile(const MapSystem& system, const Realisation& omega, double rho,
                                           std::size_t n_max, const DensityGrid& f, std::size_t n_centers,
                                           std::uint64_t seed, std::size_t threads) {
  if (n_max == 0) throw ContractViolation("short_return_profile: n_max must be at least 1");
  const auto centers = draw_centers(f, n_centers, seed);
  // hits[n - 1][i]: one incremental image sequence per center covers every n.
  std::vector<std::vector<char>> hits(n_max, std::vector<char>(n_centers));
  parallel_for(n_centers, threads, [&](std::size_t i) {
    const Interval B = Ball(centers[i], rho).interval();
    IntervalUnion image({B});
    for (std::size_t n = 1; n <= n_max; ++n) {
      image = image_under(system.map(omega.symbol_at(static_cast<std::int64_t>(n - 1))), image);
      hits[n - 1][i] = image.intersects(B);
    }
  });
  std::vector<Estimate> out;
  out.reserve(n_max);
  for (const auto& h : hits) out.push_back(bernoulli_estimate(h));
  return out;
}

ShortReturnScaling fit_short_return_scaling(std::span<const double> rho, std::span<const Estimate> estimates) {
  if (rho.size() != estimates.size()) throw ContractViolation("scaling fit: length mismatch");
  if (rho.size() < 3) throw ContractViolation("scaling fit: need at least three radii");
  ShortReturnScaling out;
  std::vector<double> logv, sq, lr;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double v = estimates[i].value;
    if (!(v > 0.0)) {
      v = 0.5 / static_cast<double>(std::max<std::size_t>(estimates[i].n_centers, 1));
      ++out.floored;
    }
    logv.push_back(std::log(v));
    sq.push_back(std::sqrt(std::abs(std::log(rho[i]))));
    lr.push_back(std::log(rho[i]));
  }
  const auto a = least_squares(sq, logv);
  out.sqrt_log = {a.intercept, -a.slope, a.rms_residual};
  const auto b = least_squares(lr, logv);
  out.power = {b.intercept, b.slope, b.rms_residual};
  out.sqrt_log_no_worse = out.sqrt_log.rms_residual <= out.power.rms_residual;
  return out;
}

}  // namespace qhit
