#include "qhit/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qhit/error.hpp"
#include "qhit/random.hpp"

namespace qhit {

DensityGrid::DensityGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ContractViolation("density grid needs at least one bin");
  const double w = bin_width();
  cdf_.resize(values_.size() + 1);
  cdf_[0] = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!(values_[k] >= 0.0)) throw ContractViolation("density grid values must be nonnegative");
    cdf_[k + 1] = cdf_[k] + values_[k] * w;
  }
  if (std::abs(cdf_.back() - 1.0) > 1e-10)
    throw ContractViolation("density grid mass is " + std::to_string(cdf_.back()) + ", expected 1");
}

DensityGrid DensityGrid::uniform(std::size_t bins) { return DensityGrid(std::vector<double>(bins, 1.0)); }

DensityGrid DensityGrid::normalized(std::vector<double> values) {
  if (values.empty()) throw ContractViolation("density grid needs at least one bin");
  double mass = 0.0;
  for (double& v : values) {
    if (v < 0.0 && v > -1e-300) v = 0.0;
    mass += v;
  }
  mass /= static_cast<double>(values.size());
  if (!(mass > 0.0)) throw DomainError("cannot normalize a density of zero mass");
  for (double& v : values) v /= mass;
  return DensityGrid(std::move(values));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("l1_distance: bin counts differ");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d / static_cast<double>(a.size());
}

UlamMatrix::UlamMatrix(std::size_t bins, std::vector<std::size_t> column_start, std::vector<std::uint32_t> rows,
                       std::vector<double> weights)
    : bins_(bins), column_start_(std::move(column_start)), rows_(std::move(rows)), weights_(std::move(weights)) {
  if (column_start_.size() != bins_ + 1 || rows_.size() != weights_.size() || column_start_.back() != rows_.size())
    throw ContractViolation("Ulam matrix: inconsistent sparse layout");
}

double UlamMatrix::entry(std::size_t row, std::size_t col) const {
  for (std::size_t k = column_start_.at(col); k < column_start_[col + 1]; ++k)
    if (rows_[k] == row) return weights_[k];
  return 0.0;
}

double UlamMatrix::column_sum(std::size_t col) const {
  double s = 0.0;
  for (std::size_t k = column_start_.at(col); k < column_start_[col + 1]; ++k) s += weights_[k];
  return s;
}

void UlamMatrix::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != bins_ || out.size() != bins_) throw ContractViolation("Ulam matrix: bin count mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < bins_; ++j) {
    const double v = in[j];
    if (v == 0.0) continue;
    for (std::size_t k = column_start_[j]; k < column_start_[j + 1]; ++k) out[rows_[k]] += weights_[k] * v;
  }
}

UlamMatrix ulam_matrix(const FiberMap& map, std::size_t bins) {
  if (bins < 2) throw ContractViolation("ulam_matrix: need at least 2 bins");
  if (bins > 0xFFFFFFFFULL) throw ContractViolation("ulam_matrix: too many bins");
  const double m = static_cast<double>(bins);

  struct Triplet {
    std::uint32_t col;
    std::uint32_t row;
    double w;
  };
  std::vector<Triplet> triplets;
  triplets.reserve(bins * (map.branch_count() + 2));

  std::vector<double> pre;  // preimages of the target-bin edges inside one branch
  for (const auto& b : map.branches()) {
    const Interval img = b.image();
    const auto first = static_cast<std::size_t>(std::clamp(std::floor(img.lo * m), 0.0, m - 1));
    const auto last = static_cast<std::size_t>(std::clamp(std::ceil(img.hi * m), 1.0, m));  // exclusive
    pre.clear();
    for (std::size_t i = first; i <= last; ++i) {
      const double e = std::clamp(static_cast<double>(i) / m, img.lo, img.hi);
      if (i == first || e <= img.lo)
        pre.push_back(b.lo());
      else if (i == last || e >= img.hi)
        pre.push_back(b.hi());  // also absorbs a plateau at the top of the image
      else
        pre.push_back(b.inverse(e));
    }
    for (std::size_t i = first; i < last; ++i) {
      const double a = pre[i - first];
      const double c = pre[i - first + 1];
      if (!(c > a)) continue;
      auto j = static_cast<std::size_t>(std::clamp(std::floor(a * m), 0.0, m - 1));
      for (; j < bins; ++j) {
        const double lo = std::max(a, static_cast<double>(j) / m);
        const double hi = std::min(c, static_cast<double>(j + 1) / m);
        if (hi > lo) triplets.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), (hi - lo) * m});
        if (static_cast<double>(j + 1) / m >= c) break;
      }
    }
  }

  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& x, const Triplet& y) { return x.col != y.col ? x.col < y.col : x.row < y.row; });
  std::vector<std::size_t> start(bins + 1, 0);
  std::vector<std::uint32_t> rows;
  std::vector<double> weights;
  rows.reserve(triplets.size());
  weights.reserve(triplets.size());
  for (std::size_t t = 0; t < triplets.size(); ++t) {
    if (!rows.empty() && t > 0 && triplets[t].col == triplets[t - 1].col && triplets[t].row == triplets[t - 1].row) {
      weights.back() += triplets[t].w;
      continue;
    }
    rows.push_back(triplets[t].row);
    weights.push_back(triplets[t].w);
    ++start[triplets[t].col + 1];
  }
  for (std::size_t j = 0; j < bins; ++j) start[j + 1] += start[j];
  // The pieces tile each source bin; dividing by their sum removes the
  // round-off of the endpoint differences.
  for (std::size_t j = 0; j < bins; ++j) {
    double s = 0.0;
    for (std::size_t k = start[j]; k < start[j + 1]; ++k) s += weights[k];
    if (!(s > 0.0)) throw ContractViolation("ulam_matrix: bin " + std::to_string(j) + " has no image");
    for (std::size_t k = start[j]; k < start[j + 1]; ++k) weights[k] /= s;
  }
  return UlamMatrix(bins, std::move(start), std::move(rows), std::move(weights));
}

UlamFamily::UlamFamily(const MapSystem& system, std::size_t bins) : bins_(bins) {
  matrices_.reserve(system.alphabet_size());
  for (const auto& map : system.maps()) matrices_.push_back(ulam_matrix(map, bins));
}

std::vector<double> UlamFamily::push_along(const Realisation& omega, std::int64_t first, std::size_t steps,
                                           std::vector<double> v) const {
  if (v.size() != bins_) throw ContractViolation("push_along: bin count mismatch");
  std::vector<double> tmp(bins_);
  for (std::size_t k = 0; k < steps; ++k) {
    matrix(omega.symbol_at(first + static_cast<std::int64_t>(k))).apply(v, tmp);
    std::swap(v, tmp);
  }
  return v;
}

DensityGrid push_density(const UlamMatrix& P, const DensityGrid& f) {
  if (P.bins() != f.bins()) throw ContractViolation("push_density: bin count mismatch");
  std::vector<double> out(f.bins());
  P.apply(f.values(), out);
  for (double& v : out) v = std::max(v, 0.0);
  return DensityGrid::normalized(std::move(out));
}

QuenchedDensity quenched_density(const UlamFamily& family, const Realisation& omega, std::size_t n_pull) {
  if (n_pull == 0) throw ContractViolation("quenched_density: n_pull must be at least 1");
  const std::vector<double> uniform(family.bins(), 1.0);
  auto deep = family.push_along(omega, -static_cast<std::int64_t>(n_pull), n_pull, uniform);
  const std::size_t half = n_pull / 2;
  auto shallow = family.push_along(omega, -static_cast<std::int64_t>(half), half, uniform);
  DensityGrid h = DensityGrid::normalized(std::move(deep));
  DensityGrid h_half = DensityGrid::normalized(std::move(shallow));
  const double conv = l1_distance(h.values(), h_half.values());
  return {std::move(h), conv};
}

QuenchedDensity quenched_density(const MapSystem& system, const Realisation& omega, std::size_t n_pull,
                                 std::size_t bins) {
  return quenched_density(UlamFamily(system, bins), omega, n_pull);
}

DensityGrid marginal_density(const UlamFamily& family, const DrivingConfig& config, std::size_t n_omega,
                             std::size_t n_pull) {
  if (n_omega == 0) throw ContractViolation("marginal_density: n_omega must be at least 1");
  std::vector<double> sum(family.bins(), 0.0);
  for (const auto& omega : sample_realisations(config, n_omega)) {
    const auto q = quenched_density(family, omega, n_pull);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += q.density[k];
  }
  return DensityGrid::normalized(std::move(sum));
}

DensityGrid marginal_density(const MapSystem& system, const DrivingConfig& config, std::size_t n_omega,
                             std::size_t n_pull, std::size_t bins) {
  return marginal_density(UlamFamily(system, bins), config, n_omega, n_pull);
}

double invariance_residual(const UlamFamily& family, const Realisation& omega, std::size_t n_pull) {
  const auto here = quenched_density(family, omega, n_pull);
  const auto next = quenched_density(family, omega.shift(1), n_pull);
  std::vector<double> pushed(family.bins());
  family.matrix(omega.symbol_at(0)).apply(here.density.values(), pushed);
  return l1_distance(pushed, next.density.values());
}

double invariance_residual(const MapSystem& system, const Realisation& omega, std::size_t bins, std::size_t n_pull) {
  return invariance_residual(UlamFamily(system, bins), omega, n_pull);
}

double grid_variation(std::span<const double> f) {
  double v = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) v += std::abs(f[k] - f[k - 1]);
  return v;
}

DoeblinFortetFit doeblin_fortet_probe(const UlamFamily& family, const Realisation& omega, std::size_t n,
                                      std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ContractViolation("doeblin_fortet_probe: trials must be at least 1");
  const std::size_t m = family.bins();
  const CounterRng base(seed);
  std::vector<double> var_in(trials), l1_in(trials), var_out(trials);
  std::vector<double> psi(m);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng = base.substream(t);
    const std::size_t jumps = 1 + rng.next_u64() % 16;
    std::vector<std::size_t> cuts;
    for (std::size_t k = 0; k < jumps; ++k) cuts.push_back(1 + rng.next_u64() % (m - 1));
    std::sort(cuts.begin(), cuts.end());
    const double scale = std::exp((2.0 * rng.uniform() - 1.0) * std::log(4.0));
    double level = scale * rng.uniform();
    std::size_t next_cut = 0;
    for (std::size_t k = 0; k < m; ++k) {
      while (next_cut < cuts.size() && cuts[next_cut] == k) {
        level = scale * rng.uniform();
        ++next_cut;
      }
      psi[k] = level;
    }
    var_in[t] = grid_variation(psi);
    double l1 = 0.0;
    for (double v : psi) l1 += std::abs(v);
    l1_in[t] = l1 / static_cast<double>(m);
    const auto out = family.push_along(omega, 0, n, psi);
    var_out[t] = grid_variation(out);
  }

  // Normal equations of the two-regressor least-squares problem.
  double svv = 0, svl = 0, sll = 0, svo = 0, slo = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    svv += var_in[t] * var_in[t];
    svl += var_in[t] * l1_in[t];
    sll += l1_in[t] * l1_in[t];
    svo += var_in[t] * var_out[t];
    slo += l1_in[t] * var_out[t];
  }
  DoeblinFortetFit fit;
  fit.trials = trials;
  const double det = svv * sll - svl * svl;
  if (std::abs(det) > 1e-300 * std::max(1.0, svv * sll)) {
    fit.eta = (svo * sll - slo * svl) / det;
    fit.c = (svv * slo - svl * svo) / det;
  } else if (svv > 0.0) {
    fit.eta = svo / svv;
  }
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t)
    if (var_out[t] > fit.eta * var_in[t] + fit.c * l1_in[t] + 1e-12 * (var_in[t] + l1_in[t])) ++violations;
  fit.violation_fraction = static_cast<double>(violations) / static_cast<double>(trials);
  return fit;
}

}  // namespace qhit
