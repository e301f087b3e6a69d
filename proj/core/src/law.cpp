#include <algorithm>
#include <cmath>
#include <limits>

#include "qhit/error.hpp"
#include "qhit/parallel.hpp"
#include "qhit/quenched_law.hpp"
#include "qhit/random.hpp"

namespace qhit {

HitResult hitting_time(Trajectory start, const Ball& b, std::size_t max_iter) {
  if (max_iter == 0) throw ContractViolation("hitting_time: max_iter must be at least 1");
  const Interval J = b.interval();
  for (std::size_t j = 1; j <= max_iter; ++j) {
    start.step();
    if (J.contains(start.position())) return {j, max_iter};
  }
  return {std::nullopt, max_iter};
}

HitResult hitting_time(const MapSystem& system, const Realisation& omega, double x, const Ball& b,
                       std::size_t max_iter) {
  return hitting_time(Trajectory::floating(system, omega, x), b, max_iter);
}

HitResult hitting_time(const MapSystem& system, const Realisation& omega, Rational x, const Ball& b,
                       std::size_t max_iter) {
  return hitting_time(Trajectory::rational(system, omega, x), b, max_iter);
}

void LawConfig::validate() const {
  if (t_grid.empty()) throw ContractViolation("law: t-grid is empty");
  if (!(t_grid.front() > 0.0)) throw ContractViolation("law: t-grid must start above 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ContractViolation("law: t-grid must be strictly increasing");
  if (n_samples == 0) throw ContractViolation("law: n_samples must be at least 1");
  if (!(max_iter_factor >= 2.0)) throw ContractViolation("law: max_iter_factor must be at least 2");
}

std::size_t steps_for(double t, double mu_b) {
  if (!(mu_b > 0.0)) throw DomainError("ball mass must be positive");
  const double n = std::floor(t / mu_b);
  if (n >= 1e18) return static_cast<std::size_t>(1e18);
  return n <= 0.0 ? 0 : static_cast<std::size_t>(n);
}

namespace {

enum class Start { density, ball };

EmpiricalLaw run_law(const MapSystem& system, const Realisation& omega, const Ball& b, double mu_b,
                     const DensityGrid& f, const LawConfig& cfg, Start start) {
  cfg.validate();
  if (!(mu_b > 0.0)) throw DomainError("law: marginal ball mass must be positive");
  EmpiricalLaw law;
  law.t = cfg.t_grid;
  law.n_samples = cfg.n_samples;
  for (double t : cfg.t_grid) law.steps.push_back(steps_for(t, mu_b));
  const double cap = std::ceil(cfg.max_iter_factor * static_cast<double>(law.steps.back()));
  law.max_iter = std::max<std::size_t>(1, static_cast<std::size_t>(cap));

  law.times.assign(cfg.n_samples, 0);
  const CounterRng base(cfg.seed);
  parallel_for(cfg.n_samples, cfg.threads, [&](std::size_t i) {
    CounterRng rng = base.substream(i);
    const double y = start == Start::ball ? conditional_sample(f, b, rng) : sample_point(f, rng);
    const auto hit = hitting_time(Trajectory::sampled(system, omega, y, rng.next_u64()), b, law.max_iter);
    law.times[i] = hit.time.value_or(law.max_iter + 1);
  });

  for (std::size_t tau : law.times) law.censored += tau > law.max_iter;
  for (std::size_t N : law.steps) {
    std::size_t alive = 0;
    for (std::size_t tau : law.times) alive += tau > N;
    law.survival.push_back(static_cast<double>(alive) / static_cast<double>(cfg.n_samples));
    law.n_eff.push_back(cfg.n_samples);
  }
  return law;
}

}  // namespace

EmpiricalLaw hitting_law(const MapSystem& system, const Realisation& omega, const Ball& b, double mu_b,
                         const DensityGrid& f_omega, const LawConfig& cfg) {
  return run_law(system, omega, b, mu_b, f_omega, cfg, Start::density);
}

EmpiricalLaw return_law(const MapSystem& system, const Realisation& omega, const Ball& b, double mu_b,
                        const DensityGrid& f_omega, const LawConfig& cfg) {
  if (!(ball_measure(f_omega, b) > 0.0)) throw DomainError("return_law: ball has zero quenched mass");
  return run_law(system, omega, b, mu_b, f_omega, cfg, Start::ball);
}

double product_law(std::span<const double> masses, std::size_t N) {
  if (N > masses.size()) throw ContractViolation("product_law: fewer fiber masses than steps");
  double p = 1.0;
  for (std::size_t j = 0; j < N; ++j) p *= 1.0 - masses[j];
  return p;
}

std::vector<double> fiber_masses(const UlamFamily& family, const Realisation& omega, const DensityGrid& h_omega,
                                 const Ball& b, std::size_t n_max) {
  if (h_omega.bins() != family.bins()) throw ContractViolation("fiber_masses: bin count mismatch");
  std::vector<double> out;
  out.reserve(n_max);
  std::vector<double> v(h_omega.values().begin(), h_omega.values().end());
  std::vector<double> tmp(v.size());
  for (std::size_t j = 0; j < n_max; ++j) {
    family.matrix(omega.symbol_at(static_cast<std::int64_t>(j))).apply(v, tmp);
    std::swap(v, tmp);
    out.push_back(ball_measure(DensityGrid::normalized(v), b));
  }
  return out;
}

double product_law(const UlamFamily& family, const Realisation& omega, const DensityGrid& h_omega, const Ball& b,
                   std::size_t N) {
  return product_law(fiber_masses(family, omega, h_omega, b, N), N);
}

std::size_t counting_Z(Trajectory y, const Ball& b, double t, double mu_b) {
  const std::size_t N = steps_for(t, mu_b);
  const Interval J = b.interval();
  std::size_t z = 0;
  for (std::size_t n = 0; n < N; ++n) {
    if (n > 0) y.step();
    z += J.contains(y.position());
  }
  return z;
}

std::size_t counting_Y(Trajectory y, const Ball& b, double t, double mu_b, std::size_t J) {
  if (J == 0) throw ContractViolation("counting_Y: J must be at least 1");
  const std::size_t N = steps_for(t, mu_b);
  const Interval I = b.interval();
  std::size_t count = 0;
  for (std::size_t j = 1; j <= N; ++j) {
    y.step();
    if (!I.contains(y.position())) continue;
    Trajectory inner = y;  // continues on theta^j omega
    for (std::size_t k = 1; k < J; ++k) {
      inner.step();
      if (I.contains(inner.position())) {
        ++count;
        break;
      }
    }
  }
  return count;
}

KsResult ks_to_exponential(const EmpiricalLaw& law) {
  KsResult r;
  for (std::size_t i = 0; i < law.t.size(); ++i)
    r.distance = std::max(r.distance, std::abs(law.survival[i] - std::exp(-law.t[i])));
  if (law.n_samples > 0) r.censored_fraction = static_cast<double>(law.censored) / static_cast<double>(law.n_samples);
  return r;
}

KacResult kac_check(const MapSystem& system, const Realisation& omega, const Ball& b, double mu_b,
                    const DensityGrid& f_omega, std::size_t n_samples, std::uint64_t seed, std::size_t threads,
                    double cap_factor) {
  if (n_samples == 0) throw ContractViolation("kac_check: n_samples must be at least 1");
  if (!(mu_b > 0.0)) throw DomainError("kac_check: marginal ball mass must be positive");
  if (!(ball_measure(f_omega, b) > 0.0)) throw DomainError("kac_check: ball has zero quenched mass");
  const auto cap = static_cast<std::size_t>(std::max(1.0, std::ceil(cap_factor / mu_b)));
  std::vector<std::size_t> times(n_samples);
  const CounterRng base(seed);
  parallel_for(n_samples, threads, [&](std::size_t i) {
    CounterRng rng = base.substream(i);
    const double y = conditional_sample(f_omega, b, rng);
    times[i] = hitting_time(Trajectory::sampled(system, omega, y, rng.next_u64()), b, cap).time.value_or(0);
  });
  KacResult r;
  double total = 0.0;
  for (std::size_t tau : times) {
    if (tau == 0) {
      ++r.censored;
      total += static_cast<double>(cap);
    } else {
      total += static_cast<double>(tau);
    }
  }
  r.lower_bound = r.censored > 0;
  r.mean_return = total / static_cast<double>(n_samples);
  r.ratio = r.mean_return * mu_b;
  return r;
}

MixingGap mixing_gap(const MapSystem& system, const Realisation& omega, const Ball& b, const DensityGrid& f_omega,
                     std::size_t k_max, std::size_t n_samples, std::uint64_t seed, std::size_t threads) {
  if (k_max == 0) throw ContractViolation("mixing_gap: k_max must be at least 1");
  if (n_samples == 0) throw ContractViolation("mixing_gap: n_samples must be at least 1");
  std::vector<std::size_t> times(n_samples);
  std::vector<char> inside(n_samples);
  const CounterRng base(seed);
  parallel_for(n_samples, threads, [&](std::size_t i) {
    CounterRng rng = base.substream(i);
    const double y = sample_point(f_omega, rng);
    inside[i] = b.contains(y);
    times[i] = hitting_time(Trajectory::sampled(system, omega, y, rng.next_u64()), b, k_max).time.value_or(k_max + 1);
  });
  const double n = static_cast<double>(n_samples);
  double in_b = 0.0;
  for (char c : inside) in_b += c;
  const double p = in_b / n;
  MixingGap out;
  for (std::size_t k = 1; k <= k_max; ++k) {
    double alive = 0.0, both = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      alive += times[i] > k;
      both += inside[i] && times[i] > k;
    }
    out.gap = std::max(out.gap, std::abs(alive / n * p - both / n));
  }
  out.standard_error = std::sqrt(p * (1.0 - p) / n);
  return out;
}

}  // namespace qhit
