#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qhit/driving.hpp"
#include "qhit/interval_maps.hpp"
#include "qhit/transfer.hpp"

namespace qhit {

struct ShortReturnConfig {
  double a = 0.0;
  double b = 0.25;
  std::vector<double> rho_grid;
  std::size_t n_centers = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// a = 1 / (4 log A) with A = expansion_constant(system).
  static double default_a(const MapSystem& system);
  static ShortReturnConfig with_default_a(const MapSystem& system, std::vector<double> rho_grid);

  /// a > 0, b in (0, 1), rho in (0, 1/2), n_centers >= 1 and J(rho) >= 1 on the grid.
  void validate() const;
};

/// J(rho) = floor(a |log rho|).
std::size_t short_return_horizon(double a, double rho);

/// True iff B_rho(x) meets T_omega^n B_rho(x) for some 1 <= n < J, decided
/// with exact interval images.
bool short_return_indicator(const MapSystem& system, const Realisation& omega, double x, double rho, std::size_t J);

/// True iff B_rho(x) meets T_omega^n B_rho(x) for this single n.
bool level_set_indicator(const MapSystem& system, const Realisation& omega, double x, double rho, std::size_t n);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_centers = 0;
};

/// Fraction of centers x ~ f with B_rho(x) meeting T^n B_rho(x).
Estimate level_set_measure(const MapSystem& system, const Realisation& omega, std::size_t n, double rho,
                           const DensityGrid& f, std::size_t n_centers, std::uint64_t seed, std::size_t threads = 1);

/// Fraction of centers x ~ f in the short-return set with horizon J(rho).
Estimate very_short_set_measure(const MapSystem& system, const Realisation& omega, double rho,
                                const ShortReturnConfig& cfg, const DensityGrid& f);

/// level_set_measure for n = 1..n_max on one shared center sample.
std::vector<Estimate> short_return_profile(const MapSystem& system, const Realisation& omega, double rho,
                                           std::size_t n_max, const DensityGrid& f, std::size_t n_centers,
                                           std::uint64_t seed, std::size_t threads = 1);

struct ScalingModelFit {
  double log_c = 0.0;
  double rate = 0.0;  // c in exp(-c sqrt|log rho|), or the power q in rho^q
  double rms_residual = 0.0;
};

struct ShortReturnScaling {
  ScalingModelFit sqrt_log;  // log V = log C - c sqrt|log rho|
  ScalingModelFit power;     // log V = log C + q log rho
  bool sqrt_log_no_worse = false;
  std::size_t floored = 0;  // zero estimates replaced by 1 / (2 n_centers)
};

ShortReturnScaling fit_short_return_scaling(std::span<const double> rho, std::span<const Estimate> estimates);

}  // namespace qhit
