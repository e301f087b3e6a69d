#include "qhit/interval_maps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qhit/error.hpp"

namespace qhit {
namespace {

constexpr double kImageTolerance = 1e-12;

// Unclamped PM left-branch value and slope.
double pm_left_value(double x, double alpha, PmCoefficient c) noexcept {
  const double k = c == PmCoefficient::clamped ? 2.0 : 1.0;
  return x + k * x * std::pow(2.0 * x, alpha);
}

double pm_left_slope(double x, double alpha, PmCoefficient c) noexcept {
  const double k = c == PmCoefficient::clamped ? 2.0 : 1.0;
  return 1.0 + k * (1.0 + alpha) * std::pow(2.0 * x, alpha);
}

}  // namespace

Branch Branch::affine(double lo, double hi, double slope, double intercept) {
  if (!(lo < hi) || lo < 0.0 || hi > 1.0) throw ContractViolation("affine branch: domain must be a subinterval of [0,1]");
  if (!(slope > 0.0)) throw ContractViolation("affine branch: slope must be positive");
  Branch b;
  b.kind_ = BranchKind::affine;
  b.lo_ = lo;
  b.hi_ = hi;
  b.slope_ = slope;
  b.intercept_ = intercept;
  b.inverse_hi_ = hi;
  return b;
}

Branch Branch::pm_left(double alpha, PmCoefficient coefficient) {
  if (!(alpha > 0.0)) throw ContractViolation("PM branch: alpha must be positive");
  Branch b;
  b.kind_ = BranchKind::pm_left;
  b.lo_ = 0.0;
  b.hi_ = 0.5;
  b.alpha_ = alpha;
  b.coefficient_ = coefficient;
  b.inverse_hi_ = 0.5;
  if (coefficient == PmCoefficient::clamped) {
    // Point where the unclamped formula reaches 1.
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (pm_left_value(mid, alpha, coefficient) < 1.0 ? lo : hi) = mid;
    }
    b.inverse_hi_ = hi;
  }
  return b;
}

Branch Branch::pm_right() {
  Branch b = affine(0.5, 1.0, 2.0, -1.0);
  b.kind_ = BranchKind::pm_right;
  return b;
}

double Branch::apply(double x) const noexcept {
  double y;
  switch (kind_) {
    case BranchKind::pm_left:
      y = pm_left_value(x, alpha_, coefficient_);
      break;
    default:
      // A single rounding: exact whenever the result is representable.
      y = std::fma(slope_, x, intercept_);
  }
  return std::clamp(y, 0.0, 1.0);
}

double Branch::derivative(double x) const noexcept {
  if (kind_ == BranchKind::pm_left) return pm_left_slope(x, alpha_, coefficient_);
  return slope_;
}

double Branch::inverse(double y) const {
  const Interval img = image();
  if (!(y >= img.lo - kImageTolerance && y <= img.hi + kImageTolerance))
    throw DomainError("inverse_branch: y = " + std::to_string(y) + " outside branch image");
  y = std::clamp(y, img.lo, img.hi);
  if (kind_ != BranchKind::pm_left) return std::clamp((y - intercept_) / slope_, lo_, hi_);

  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return inverse_hi_;
  // T(x) >= x, so the root lies in [0, min(y, inverse_hi)]. The branch is
  // convex increasing; Newton is kept inside the bracket, bisecting otherwise.
  double lo = 0.0;
  double hi = std::min(y, inverse_hi_);
  double x = 0.5 * y;
  for (int it = 0; it < 100; ++it) {
    const double f = pm_left_value(x, alpha_, coefficient_) - y;
    if (f == 0.0) return x;
    (f < 0.0 ? lo : hi) = x;
    double next = x - f / pm_left_slope(x, alpha_, coefficient_);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * x || hi - lo <= std::numeric_limits<double>::min())
      break;
  }
  return x;
}

Interval Branch::image() const noexcept {
  if (kind_ == BranchKind::pm_left) return {0.0, 1.0};
  return {apply(lo_), apply(hi_)};
}

double Branch::sup_derivative() const noexcept {
  if (kind_ == BranchKind::pm_left) return derivative(inverse_hi_);
  return slope_;
}

double Branch::inf_derivative() const noexcept {
  if (kind_ == BranchKind::pm_left) return derivative(0.0);
  return slope_;
}

FiberMap::FiberMap(std::vector<Branch> branches, std::string label)
    : branches_(std::move(branches)), label_(std::move(label)) {
  if (branches_.empty()) throw ContractViolation("fiber map '" + label_ + "' has no branches");
  if (branches_.size() > 0xFFFF) throw ContractViolation("fiber map '" + label_ + "' has too many branches");
  if (branches_.front().lo() != 0.0 || branches_.back().hi() != 1.0)
    throw ContractViolation("fiber map '" + label_ + "': branch domains must cover [0,1)");
  for (std::size_t i = 0; i + 1 < branches_.size(); ++i)
    if (branches_[i].hi() != branches_[i + 1].lo())
      throw ContractViolation("fiber map '" + label_ + "': branch domains must be contiguous and ordered");
  for (const auto& b : branches_) {
    const Interval img = b.image();
    if (std::abs(img.lo) > kImageTolerance || std::abs(img.hi - 1.0) > kImageTolerance)
      throw ContractViolation("fiber map '" + label_ + "': every branch must map onto [0,1]");
    if (b.kind() == BranchKind::pm_left && b.coefficient() == PmCoefficient::clamped) continue;  // plateau at 1
    double prev = b.apply(b.lo());
    for (int k = 1; k <= 64; ++k) {
      const double x = b.lo() + b.length() * k / 64.0;
      const double y = b.apply(x);
      if (!(y > prev)) throw ContractViolation("fiber map '" + label_ + "': branch is not increasing");
      prev = y;
    }
  }
  for (const auto& b : branches_) branch_lo_.push_back(b.lo());
}

FiberMap FiberMap::multiply_mod1(unsigned slope) {
  if (slope == 0) throw ContractViolation("multiply_mod1: slope must be at least 1");
  std::vector<Branch> branches;
  branches.reserve(slope);
  for (unsigned j = 0; j < slope; ++j) {
    const double lo = static_cast<double>(j) / slope;
    const double hi = j + 1 == slope ? 1.0 : static_cast<double>(j + 1) / slope;
    branches.push_back(Branch::affine(lo, hi, slope, -static_cast<double>(j)));
  }
  FiberMap map(std::move(branches), std::to_string(slope) + "x mod 1");
  map.modular_slope_ = slope;
  return map;
}

FiberMap FiberMap::pomeau_manneville(double alpha, PmCoefficient coefficient) {
  std::string label = "PM(alpha=" + std::to_string(alpha) + ")";
  return FiberMap({Branch::pm_left(alpha, coefficient), Branch::pm_right()}, std::move(label));
}

std::size_t FiberMap::branch_index(double x) const noexcept {
  const auto it = std::upper_bound(branch_lo_.begin(), branch_lo_.end(), x);
  if (it == branch_lo_.begin()) return 0;
  return static_cast<std::size_t>(it - branch_lo_.begin()) - 1;
}

double FiberMap::sup_derivative() const noexcept {
  double s = 0.0;
  for (const auto& b : branches_) s = std::max(s, b.sup_derivative());
  return s;
}

double FiberMap::inf_derivative() const noexcept {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& b : branches_) s = std::min(s, b.inf_derivative());
  return s;
}

MapSystem::MapSystem(std::vector<FiberMap> maps) : maps_(std::move(maps)) {
  if (maps_.empty()) throw ContractViolation("map system needs at least one fiber map");
  integer_affine_ = std::all_of(maps_.begin(), maps_.end(), [](const FiberMap& m) { return m.modular_slope().has_value(); });
}

void MapSystem::throw_symbol_out_of_range(Symbol s) const {
  throw ContractViolation("driving symbol " + std::to_string(s) + " has no fiber map; the system has " +
                          std::to_string(maps_.size()));
}

bool MapSystem::all_affine() const noexcept {
  for (const auto& m : maps_)
    for (const auto& b : m.branches())
      if (b.kind() == BranchKind::pm_left) return false;
  return true;
}

double apply(const FiberMap& map, double x) noexcept {
  return map.branches()[map.branch_index(x)].apply(x);
}

double derivative(const FiberMap& map, double x) noexcept {
  return map.branches()[map.branch_index(x)].derivative(x);
}

double inverse_branch(const FiberMap& map, std::size_t branch, double y) {
  if (branch >= map.branch_count()) throw ContractViolation("inverse_branch: no such branch");
  return map.branch(branch).inverse(y);
}

double compose_apply(const MapSystem& system, const Realisation& omega, std::size_t n, double x) {
  for (std::size_t j = 0; j < n; ++j) x = apply(system.map(omega.symbol_at(static_cast<std::int64_t>(j))), x);
  return x;
}

IntervalUnion::IntervalUnion(std::vector<Interval> pieces) {
  std::erase_if(pieces, [](const Interval& i) { return !(i.lo <= i.hi); });
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& p : pieces) {
    if (!intervals_.empty() && p.lo <= intervals_.back().hi)
      intervals_.back().hi = std::max(intervals_.back().hi, p.hi);
    else
      intervals_.push_back(p);
  }
}

double IntervalUnion::measure() const noexcept {
  double total = 0.0;
  for (const auto& i : intervals_) total += i.length();
  return total;
}

bool IntervalUnion::contains(double x, double tolerance) const noexcept {
  for (const auto& i : intervals_)
    if (i.lo - tolerance <= x && x <= i.hi + tolerance) return true;
  return false;
}

bool IntervalUnion::intersects(const Interval& other) const noexcept {
  const auto it = std::lower_bound(intervals_.begin(), intervals_.end(), other.lo,
                                   [](const Interval& i, double v) { return i.hi < v; });
  return it != intervals_.end() && it->lo <= other.hi;
}

IntervalUnion image_under(const FiberMap& map, const IntervalUnion& set) {
  std::vector<Interval> out;
  for (const auto& piece : set.intervals()) {
    for (const auto& b : map.branches()) {
      const double lo = std::max(piece.lo, b.lo());
      const double hi = std::min(piece.hi, b.hi());
      if (lo > hi) continue;
      // A piece touching only the open right end of a branch belongs to the next one.
      if (lo >= b.hi() && b.hi() < 1.0) continue;
      out.push_back({b.apply(lo), b.apply(hi)});
    }
  }
  return IntervalUnion(std::move(out));
}

IntervalUnion image_of_interval(const MapSystem& system, const Realisation& omega, std::size_t n, Interval J) {
  if (J.lo < 0.0 || J.hi > 1.0 || J.lo > J.hi) throw ContractViolation("image_of_interval: J must be a subinterval of [0,1]");
  IntervalUnion set({J});
  for (std::size_t j = 0; j < n; ++j) set = image_under(system.map(omega.symbol_at(static_cast<std::int64_t>(j))), set);
  return set;
}

CylinderPartition::CylinderPartition(std::size_t depth, std::vector<double> edges, std::vector<std::uint16_t> words)
    : depth_(depth), edges_(std::move(edges)), words_(std::move(words)) {
  if (edges_.size() < 2 || words_.size() != (edges_.size() - 1) * depth_)
    throw ContractViolation("cylinder partition: inconsistent edges and words");
}

std::span<const std::uint16_t> CylinderPartition::word(std::size_t i) const {
  if (i >= size()) throw ContractViolation("cylinder partition: cell index out of range");
  return std::span<const std::uint16_t>(words_).subspan(i * depth_, depth_);
}

double CylinderPartition::max_length() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i) best = std::max(best, edges_[i + 1] - edges_[i]);
  return best;
}

namespace {

std::string cap_message(const char* what, std::size_t cap) {
  return std::string(what) + ": cell count exceeds the cap of " + std::to_string(cap) + " cells";
}

// Inverse of `b` from [0,1] onto the closure of its domain, with exact endpoints.
double pull(const Branch& b, double y) {
  if (y <= 0.0) return b.lo();
  if (y >= 1.0) return b.hi();
  return b.inverse(y);
}

}  // namespace

CylinderPartition cylinder_partition(const MapSystem& system, const Realisation& omega, std::size_t depth,
                                     std::size_t cap) {
  if (depth == 0) throw ContractViolation("cylinder_partition: depth must be at least 1");
  double count = 1.0;
  for (std::size_t j = 0; j < depth; ++j) {
    count *= static_cast<double>(system.map(omega.symbol_at(static_cast<std::int64_t>(j))).branch_count());
    if (count > static_cast<double>(cap)) throw ResourceError(cap_message("cylinder_partition", cap));
  }

  std::vector<double> edges{0.0, 1.0};
  std::vector<std::uint16_t> words;  // cells x (current depth), suffix words
  std::size_t current = 0;
  for (std::size_t step = depth; step-- > 0;) {
    const FiberMap& map = system.map(omega.symbol_at(static_cast<std::int64_t>(step)));
    const std::size_t cells = edges.size() - 1;
    std::vector<double> next_edges;
    std::vector<std::uint16_t> next_words;
    next_edges.reserve(cells * map.branch_count() + 1);
    next_words.reserve(cells * map.branch_count() * (current + 1));
    for (std::size_t b = 0; b < map.branch_count(); ++b) {
      const Branch& br = map.branch(b);
      for (std::size_t c = 0; c < cells; ++c) {
        next_edges.push_back(pull(br, edges[c]));
        next_words.push_back(static_cast<std::uint16_t>(b));
        next_words.insert(next_words.end(), words.begin() + static_cast<std::ptrdiff_t>(c * current),
                          words.begin() + static_cast<std::ptrdiff_t>((c + 1) * current));
      }
    }
    next_edges.push_back(1.0);
    edges = std::move(next_edges);
    words = std::move(next_words);
    ++current;
  }
  return CylinderPartition(depth, std::move(edges), std::move(words));
}

namespace {

struct Cell {
  double lo;
  double hi;
};

// Longest n-cylinder by pruned backward enumeration: any pullback shorter
// than `bound` can only shrink further (inverse branches are contractions).
double pruned_max_cylinder(const MapSystem& system, const Realisation& omega, std::size_t n, std::size_t cap) {
  // Leftmost and rightmost cylinders seed the lower bound.
  double left = 1.0, right = 0.0;
  for (std::size_t step = n; step-- > 0;) {
    const FiberMap& map = system.map(omega.symbol_at(static_cast<std::int64_t>(step)));
    left = pull(map.branches().front(), left);
    right = pull(map.branches().back(), right);
  }
  const double bound = std::max(left, 1.0 - right);

  std::vector<Cell> cells{{0.0, 1.0}};
  std::vector<Cell> next;
  for (std::size_t step = n; step-- > 0;) {
    const FiberMap& map = system.map(omega.symbol_at(static_cast<std::int64_t>(step)));
    next.clear();
    for (const auto& b : map.branches()) {
      for (const auto& c : cells) {
        const double lo = pull(b, c.lo);
        const double hi = pull(b, c.hi);
        if (hi - lo >= bound) next.push_back({lo, hi});
      }
      if (next.size() > cap) throw ResourceError(cap_message("cylinder_diameter_profile", cap));
    }
    std::swap(cells, next);
  }
  double best = bound;
  for (const auto& c : cells) best = std::max(best, c.hi - c.lo);
  return best;
}

}  // namespace

std::vector<double> cylinder_diameter_profile(const MapSystem& system, const Realisation& omega, std::size_t n_max,
                                              std::size_t cap) {
  std::vector<double> out;
  out.reserve(n_max);
  if (system.all_affine()) {
    double d = 1.0;
    for (std::size_t j = 0; j < n_max; ++j) {
      const FiberMap& map = system.map(omega.symbol_at(static_cast<std::int64_t>(j)));
      double longest = 0.0;
      for (const auto& b : map.branches()) longest = std::max(longest, b.length());
      d *= longest;
      out.push_back(d);
    }
    return out;
  }
  for (std::size_t n = 1; n <= n_max; ++n) {
    double d = pruned_max_cylinder(system, omega, n, cap);
    if (!out.empty()) d = std::min(d, out.back());  // refinement; guards Newton round-off
    out.push_back(d);
  }
  return out;
}

std::vector<double> distortion_profile(const MapSystem& system, const Realisation& omega, std::size_t n_max,
                                       std::size_t cap) {
  std::vector<const FiberMap*> maps;
  for (std::size_t j = 0; j < n_max; ++j) maps.push_back(&system.map(omega.symbol_at(static_cast<std::int64_t>(j))));

  std::array<double, 10> offsets{};  // positions in the cell, as fractions
  offsets[0] = 0.0;
  offsets[9] = 1.0;
  for (int k = 0; k < 8; ++k) offsets[static_cast<std::size_t>(k) + 1] = 0.5 - 0.5 * std::cos((2.0 * k + 1.0) * std::numbers::pi / 16.0);

  std::vector<double> out;
  out.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const CylinderPartition part = cylinder_partition(system, omega, n, cap);
    double worst = 1.0;
    for (std::size_t c = 0; c < part.size(); ++c) {
      const Interval cell = part.cell(c);
      const auto word = part.word(c);
      double sup = 0.0, inf = std::numeric_limits<double>::infinity();
      for (double f : offsets) {
        double x = f == 1.0 ? cell.hi : cell.lo + f * cell.length();
        double jac = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          const Branch& b = maps[j]->branch(word[j]);
          jac *= b.derivative(x);
          x = b.apply(x);
        }
        sup = std::max(sup, jac);
        inf = std::min(inf, jac);
      }
      worst = std::max(worst, sup / inf);
    }
    out.push_back(worst);
  }
  return out;
}

double expansion_constant(const MapSystem& system) {
  double a = 0.0;
  for (const auto& m : system.maps()) a = std::max(a, m.sup_derivative() + 1.0 / m.inf_derivative());
  return a;
}

}  // namespace qhit
