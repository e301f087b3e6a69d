#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhit/driving.hpp"

namespace qhit {

/// Closed interval [lo, hi] of the unit interval.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool intersects(const Interval& other) const noexcept { return lo <= other.hi && other.lo <= hi; }
  bool operator==(const Interval&) const = default;
};

enum class BranchKind { affine, pm_left, pm_right };

/// Which left branch the Pomeau-Manneville family uses.
/// `standard` is x(1 + 2^a x^a), which maps [0, 1/2) onto [0, 1).
/// `clamped` is x + 2^(1+a) x^(1+a) clamped at 1; it overshoots before x = 1/2
/// and is kept only as a compatibility option.
enum class PmCoefficient { standard, clamped };

/// One monotone increasing piece of a fiber map, defined on [lo, hi).
class Branch {
 public:
  static Branch affine(double lo, double hi, double slope, double intercept);
  static Branch pm_left(double alpha, PmCoefficient coefficient = PmCoefficient::standard);
  static Branch pm_right();

  BranchKind kind() const noexcept { return kind_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double length() const noexcept { return hi_ - lo_; }
  double slope() const noexcept { return slope_; }
  double intercept() const noexcept { return intercept_; }
  double alpha() const noexcept { return alpha_; }
  PmCoefficient coefficient() const noexcept { return coefficient_; }

  bool contains(double x) const noexcept { return lo_ <= x && x < hi_; }

  /// Branch formula; valid on the closure of the domain.
  double apply(double x) const noexcept;
  double derivative(double x) const noexcept;

  /// Solves apply(x) = y on the closed domain. Affine branches in closed form,
  /// the PM left branch by bracketed Newton. Throws DomainError if y is not in
  /// the closure of the image.
  double inverse(double y) const;

  /// Closure of the image.
  Interval image() const noexcept;

  double sup_derivative() const noexcept;
  double inf_derivative() const noexcept;

 private:
  Branch() = default;

  BranchKind kind_ = BranchKind::affine;
  double lo_ = 0.0;
  double hi_ = 1.0;
  double slope_ = 1.0;
  double intercept_ = 0.0;
  double alpha_ = 0.0;
  double inverse_hi_ = 1.0;  // largest x whose image is below 1 (differs from hi_ only for the clamped PM branch)
  PmCoefficient coefficient_ = PmCoefficient::standard;
};

/// Piecewise monotone full-branch map of [0, 1].
class FiberMap {
 public:
  /// Validates that the branch domains tile [0, 1) in order, every branch is
  /// increasing, and every image closure is [0, 1].
  FiberMap(std::vector<Branch> branches, std::string label);

  /// x -> s x mod 1.
  static FiberMap multiply_mod1(unsigned slope);
  static FiberMap pomeau_manneville(double alpha, PmCoefficient coefficient = PmCoefficient::standard);

  std::span<const Branch> branches() const noexcept { return branches_; }
  const Branch& branch(std::size_t i) const { return branches_.at(i); }
  std::size_t branch_count() const noexcept { return branches_.size(); }
  const std::string& label() const noexcept { return label_; }

  /// Half-open lookup; x >= 1 goes to the last branch.
  std::size_t branch_index(double x) const noexcept;

  /// Set for maps built by multiply_mod1: the orbit of a rational point can
  /// then be followed in exact integer arithmetic.
  std::optional<unsigned> modular_slope() const noexcept { return modular_slope_; }

  double sup_derivative() const noexcept;
  double inf_derivative() const noexcept;

 private:
  std::vector<Branch> branches_;
  std::vector<double> branch_lo_;
  std::string label_;
  std::optional<unsigned> modular_slope_;
};

/// Finite family of fiber maps indexed by driving symbol.
class MapSystem {
 public:
  explicit MapSystem(std::vector<FiberMap> maps);

  /// Throws ContractViolation when the driving alphabet exceeds the maps.
  const FiberMap& map(Symbol s) const {
    if (s >= maps_.size()) throw_symbol_out_of_range(s);
    return maps_[s];
  }
  std::span<const FiberMap> maps() const noexcept { return maps_; }
  std::size_t alphabet_size() const noexcept { return maps_.size(); }

  /// True when every map is x -> s x mod 1 with integer s.
  bool integer_affine() const noexcept { return integer_affine_; }
  bool all_affine() const noexcept;

 private:
  [[noreturn]] void throw_symbol_out_of_range(Symbol s) const;
  std::vector<FiberMap> maps_;
  bool integer_affine_ = false;
};

double apply(const FiberMap& map, double x) noexcept;
double derivative(const FiberMap& map, double x) noexcept;
double inverse_branch(const FiberMap& map, std::size_t branch, double y);

/// T_omega^n x = T_{theta^{n-1} omega} o ... o T_omega (x).
double compose_apply(const MapSystem& system, const Realisation& omega, std::size_t n, double x);

/// Sorted union of pairwise disjoint closed intervals.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  /// Sorts and merges overlapping or touching pieces; drops pieces with lo > hi.
  explicit IntervalUnion(std::vector<Interval> pieces);

  std::span<const Interval> intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  double measure() const noexcept;
  bool contains(double x, double tolerance = 0.0) const noexcept;
  bool intersects(const Interval& other) const noexcept;

 private:
  std::vector<Interval> intervals_;
};

/// Closure of T_omega^n(J), split at branch boundaries at every step.
IntervalUnion image_of_interval(const MapSystem& system, const Realisation& omega, std::size_t n, Interval J);

/// Pushes a union one step forward under `map` (closures of branch images).
IntervalUnion image_under(const FiberMap& map, const IntervalUnion& set);

inline constexpr std::size_t kDefaultCellCap = std::size_t{1} << 22;

/// The n-cylinders of T_omega^n, left to right, with their branch words.
class CylinderPartition {
 public:
  CylinderPartition(std::size_t depth, std::vector<double> edges, std::vector<std::uint16_t> words);

  std::size_t depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return edges_.size() - 1; }
  Interval cell(std::size_t i) const { return {edges_.at(i), edges_.at(i + 1)}; }
  std::span<const double> edges() const noexcept { return edges_; }
  /// Branch indices used at steps 0..depth-1 by the cell.
  std::span<const std::uint16_t> word(std::size_t i) const;
  double max_length() const noexcept;

 private:
  std::size_t depth_;
  std::vector<double> edges_;
  std::vector<std::uint16_t> words_;
};

/// Built by pulling the trivial partition of fiber theta^n omega back through
/// the inverse branches. Throws ResourceError when the cell count exceeds `cap`.
CylinderPartition cylinder_partition(const MapSystem& system, const Realisation& omega, std::size_t depth,
                                     std::size_t cap = kDefaultCellCap);

/// delta(n) = longest n-cylinder, n = 1..n_max. Affine systems use the exact
/// product of the longest branch at every step; otherwise a pruned
/// enumeration keeps only pullbacks at least as long as the longer of the
/// leftmost and rightmost n-cylinder. `cap` bounds that working set.
std::vector<double> cylinder_diameter_profile(const MapSystem& system, const Realisation& omega,
                                              std::size_t n_max, std::size_t cap = kDefaultCellCap);

/// Theta(n) = max over n-cylinders of sup|DT^n| / inf|DT^n|, sampled at both
/// endpoints and 8 interior Chebyshev points of every cell.
std::vector<double> distortion_profile(const MapSystem& system, const Realisation& omega, std::size_t n_max,
                                       std::size_t cap = kDefaultCellCap);

/// A = sup over maps of (sup|DT| + sup|DT^-1|), with sup|DT^-1| = 1 / inf|DT|.
double expansion_constant(const MapSystem& system);

}  // namespace qhit
