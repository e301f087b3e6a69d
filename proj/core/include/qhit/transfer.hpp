#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qhit/driving.hpp"
#include "qhit/interval_maps.hpp"

namespace qhit {

/// Piecewise-constant probability density on m uniform bins of [0, 1].
/// Values are densities w.r.t. Lebesgue, so the mass of bin k is values[k] / m.
class DensityGrid {
 public:
  /// Requires nonnegative values with total mass 1 within 1e-10.
  explicit DensityGrid(std::vector<double> values);

  static DensityGrid uniform(std::size_t bins);
  /// Rescales nonnegative values to mass 1. Throws DomainError on zero mass.
  static DensityGrid normalized(std::vector<double> values);

  std::size_t bins() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double bin_width() const noexcept { return 1.0 / static_cast<double>(values_.size()); }
  double bin_center(std::size_t k) const noexcept { return (static_cast<double>(k) + 0.5) * bin_width(); }

  /// cdf()[k] = mass of bins 0..k-1; size bins() + 1.
  std::span<const double> cdf() const noexcept { return cdf_; }
  double mass() const noexcept { return cdf_.back(); }

 private:
  std::vector<double> values_;
  std::vector<double> cdf_;
};

/// L1 distance between two densities on the same grid.
double l1_distance(std::span<const double> a, std::span<const double> b);

/// Ulam discretization of one transfer operator, stored by columns.
/// Entry (i, j) = Leb(I_j intersect T^-1 I_i) / Leb(I_j): column j is where
/// the mass of bin j goes.
class UlamMatrix {
 public:
  UlamMatrix(std::size_t bins, std::vector<std::size_t> column_start, std::vector<std::uint32_t> rows,
             std::vector<double> weights);

  std::size_t bins() const noexcept { return bins_; }
  std::size_t nonzeros() const noexcept { return rows_.size(); }
  /// Dense lookup; O(column length).
  double entry(std::size_t row, std::size_t col) const;
  double column_sum(std::size_t col) const;

  /// out = P in. Works for signed vectors; `out` is overwritten.
  void apply(std::span<const double> in, std::span<double> out) const;

 private:
  std::size_t bins_;
  std::vector<std::size_t> column_start_;
  std::vector<std::uint32_t> rows_;
  std::vector<double> weights_;
};

/// Entries from exact preimages of the bin edges under every inverse branch.
UlamMatrix ulam_matrix(const FiberMap& map, std::size_t bins);

/// One Ulam matrix per driving symbol, all on the same grid.
class UlamFamily {
 public:
  UlamFamily(const MapSystem& system, std::size_t bins);

  std::size_t bins() const noexcept { return bins_; }
  const UlamMatrix& matrix(Symbol s) const { return matrices_.at(s); }

  /// Applies L_{theta^{first+steps-1} omega} o ... o L_{theta^first omega} to `v`.
  std::vector<double> push_along(const Realisation& omega, std::int64_t first, std::size_t steps,
                                 std::vector<double> v) const;

 private:
  std::size_t bins_;
  std::vector<UlamMatrix> matrices_;
};

DensityGrid push_density(const UlamMatrix& P, const DensityGrid& f);

struct QuenchedDensity {
  DensityGrid density;
  /// L1 distance between the pullbacks of depth n_pull and n_pull / 2.
  double convergence;
};

/// h_omega = L_{theta^-1 omega} o ... o L_{theta^-n_pull omega} (uniform), renormalized.
QuenchedDensity quenched_density(const UlamFamily& family, const Realisation& omega, std::size_t n_pull);
QuenchedDensity quenched_density(const MapSystem& system, const Realisation& omega, std::size_t n_pull,
                                 std::size_t bins);

/// Average of quenched densities over `n_omega` sampled realisations.
DensityGrid marginal_density(const UlamFamily& family, const DrivingConfig& config, std::size_t n_omega,
                             std::size_t n_pull);
DensityGrid marginal_density(const MapSystem& system, const DrivingConfig& config, std::size_t n_omega,
                             std::size_t n_pull, std::size_t bins);

/// || L_omega h_omega - h_{theta omega} ||_1, both pulled back n_pull steps.
double invariance_residual(const UlamFamily& family, const Realisation& omega, std::size_t n_pull);
double invariance_residual(const MapSystem& system, const Realisation& omega, std::size_t bins, std::size_t n_pull);

/// Total variation of the piecewise-constant function: sum |f_{k+1} - f_k|.
double grid_variation(std::span<const double> f);

struct DoeblinFortetFit {
  double eta = 0.0;
  double c = 0.0;
  /// Fraction of trials with var(L^n psi) > eta var(psi) + c ||psi||_1.
  double violation_fraction = 0.0;
  std::size_t trials = 0;
};

/// Least-squares fit of var(L^n psi) ~ eta var(psi) + c ||psi||_1 over random
/// nonnegative step functions psi (random jump count, positions, levels, scale).
DoeblinFortetFit doeblin_fortet_probe(const UlamFamily& family, const Realisation& omega, std::size_t n,
                                      std::size_t trials, std::uint64_t seed);

}  // namespace qhit
