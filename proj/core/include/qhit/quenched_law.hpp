#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qhit/driving.hpp"
#include "qhit/interval_maps.hpp"
#include "qhit/measures.hpp"
#include "qhit/transfer.hpp"

namespace qhit {

/// Exact rational point num / den of [0, 1).
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
};

/// Orbit of one point along the fibers omega, theta omega, ...
///
/// Floating orbits apply the fiber maps in double precision, exactly as
/// compose_apply does. For x -> s x mod 1 they collapse onto 0 within about
/// 53 steps, so systems made only of such maps also have two exact modes:
///  - rational: num / den with num <- s num mod den;
///  - tailed: x = (num + U) / 2^62 where U is a uniform tail that is never
///    stored. Each step emits the integer part of s U as a carry drawn from
///    a hash keyed by (tail key, step index), which has the correct law.
///    Copies of a tailed trajectory continue identically.
class Trajectory {
 public:
  enum class Mode { floating, rational, tailed };

  static Trajectory floating(const MapSystem& system, const Realisation& omega, double x);
  /// Requires system.integer_affine() and num < den.
  static Trajectory rational(const MapSystem& system, const Realisation& omega, Rational x);
  /// Requires system.integer_affine(); x in [0, 1].
  static Trajectory tailed(const MapSystem& system, const Realisation& omega, double x, std::uint64_t tail_key);
  /// Tailed when the system allows it, floating otherwise.
  static Trajectory sampled(const MapSystem& system, const Realisation& omega, double x, std::uint64_t tail_key);

  Mode mode() const noexcept { return mode_; }
  /// Steps taken so far; the next step uses fiber theta^time() omega.
  std::size_t time() const noexcept { return time_; }
  double position() const noexcept;
  void step();

 private:
  Trajectory(const MapSystem& system, const Realisation& omega, Mode mode)
      : system_(&system), omega_(omega), mode_(mode) {}

  const MapSystem* system_;
  Realisation omega_;
  Mode mode_;
  std::size_t time_ = 0;
  double x_ = 0.0;
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
  std::uint64_t tail_key_ = 0;
};

/// tau = least j in [1, max_iter] with T^j x in b; nullopt when censored.
struct HitResult {
  std::optional<std::size_t> time;
  std::size_t max_iter = 0;
  bool censored() const noexcept { return !time.has_value(); }
};

/// Advances `start` (a copy) until it enters b.
HitResult hitting_time(Trajectory start, const Ball& b, std::size_t max_iter);
/// Floating orbit of x; agrees with a scan of compose_apply.
HitResult hitting_time(const MapSystem& system, const Realisation& omega, double x, const Ball& b,
                       std::size_t max_iter);
/// Exact orbit of a rational point; requires an integer-slope system.
HitResult hitting_time(const MapSystem& system, const Realisation& omega, Rational x, const Ball& b,
                       std::size_t max_iter);

struct LawConfig {
  std::vector<double> t_grid;
  std::size_t n_samples = 1000;
  double max_iter_factor = 4.0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// t-grid strictly increasing with positive first entry, n_samples >= 1,
  /// max_iter_factor >= 2.
  void validate() const;
};

struct EmpiricalLaw {
  std::vector<double> t;
  std::vector<double> survival;
  std::vector<std::size_t> n_eff;
  std::vector<std::size_t> steps;  // N(t) = floor(t / mu(B))
  std::size_t censored = 0;
  std::size_t n_samples = 0;
  std::size_t max_iter = 0;
  /// Sampled hitting times, censored entries set to max_iter + 1.
  std::vector<std::size_t> times;
};

/// N(t) = floor(t / mu_b), saturating.
std::size_t steps_for(double t, double mu_b);

/// Survival of tau over y ~ f_omega, scaled by the marginal mass mu_b.
EmpiricalLaw hitting_law(const MapSystem& system, const Realisation& omega, const Ball& b, double mu_b,
                         const DensityGrid& f_omega, const LawConfig& cfg);
/// As hitting_law with y drawn from f_omega conditioned on b.
EmpiricalLaw return_law(const MapSystem& system, const Realisation& omega, const Ball& b, double mu_b,
                        const DensityGrid& f_omega, const LawConfig& cfg);

/// prod_{j=1}^N (1 - fiber_masses[j-1]).
double product_law(std::span<const double> fiber_masses, std::size_t N);
/// mu^{theta^j omega}(b) for j = 1..n_max, pushing h_omega forward one fiber at a time.
std::vector<double> fiber_masses(const UlamFamily& family, const Realisation& omega, const DensityGrid& h_omega,
                                 const Ball& b, std::size_t n_max);
double product_law(const UlamFamily& family, const Realisation& omega, const DensityGrid& h_omega, const Ball& b,
                   std::size_t N);

/// Z = #{0 <= n <= N-1 : T^n y in b}, N = floor(t / mu_b).
std::size_t counting_Z(Trajectory y, const Ball& b, double t, double mu_b);
/// Y = #{1 <= j <= N : T^j y in b and the orbit of T^j y under theta^j omega
/// re-enters b within J - 1 steps}.
std::size_t counting_Y(Trajectory y, const Ball& b, double t, double mu_b, std::size_t J);

struct KsResult {
  double distance = 0.0;  // sup over the grid of |F(t) - e^-t|
  double censored_fraction = 0.0;
  double value() const noexcept { return distance + censored_fraction; }
};

KsResult ks_to_exponential(const EmpiricalLaw& law);

struct KacResult {
  double ratio = 0.0;
  double mean_return = 0.0;
  std::size_t censored = 0;
  bool lower_bound = false;  // censored orbits were counted at the cap
};

/// Mean return time over y ~ f_omega conditioned on b, times mu_b. Orbits are
/// cut at ceil(cap_factor / mu_b).
KacResult kac_check(const MapSystem& system, const Realisation& omega, const Ball& b, double mu_b,
                    const DensityGrid& f_omega, std::size_t n_samples, std::uint64_t seed, std::size_t threads = 1,
                    double cap_factor = 50.0);

struct MixingGap {
  double gap = 0.0;
  double standard_error = 0.0;
};

/// max_{k <= k_max} |P(tau > k) P(B) - P(B and tau > k)| under y ~ f_omega.
MixingGap mixing_gap(const MapSystem& system, const Realisation& omega, const Ball& b, const DensityGrid& f_omega,
                     std::size_t k_max, std::size_t n_samples, std::uint64_t seed, std::size_t threads = 1);

/// Function values at the bin centers of an m-bin grid.
std::vector<double> sample_on_grid(std::size_t bins, double (*g)(double));
/// 1 - |2x - 1|.
double tent(double x) noexcept;

/// lambda(k) = |int G (H o T^k) dmu^omega - mu^omega(G) mu^{theta^k omega}(H)|,
/// computed as |int H L^k((G - mu^omega(G)) h_omega)|.
std::vector<double> correlation_decay(const UlamFamily& family, const Realisation& omega, const DensityGrid& h_omega,
                                      std::span<const double> G, std::span<const double> H,
                                      std::span<const std::size_t> k_grid);
std::vector<double> correlation_decay(const UlamFamily& family, const Realisation& omega, std::size_t n_pull,
                                      std::span<const double> G, std::span<const double> H,
                                      std::span<const std::size_t> k_grid);
/// Average of the quenched lambda(k) over n_omega sampled realisations.
std::vector<double> annealed_correlation_decay(const UlamFamily& family, const DrivingConfig& config,
                                               std::size_t n_omega, std::size_t n_pull, std::span<const double> G,
                                               std::span<const double> H, std::span<const std::size_t> k_grid);

}  // namespace qhit
