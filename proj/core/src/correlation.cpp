#include <cmath>

#include "qhit/error.hpp"
#include "qhit/quenched_law.hpp"

namespace qhit {

std::vector<double> sample_on_grid(std::size_t bins, double (*g)(double)) {
  std::vector<double> out(bins);
  for (std::size_t k = 0; k < bins; ++k) out[k] = g((static_cast<double>(k) + 0.5) / static_cast<double>(bins));
  return out;
}

double tent(double x) noexcept { return 1.0 - std::abs(2.0 * x - 1.0); }

std::vector<double> correlation_decay(const UlamFamily& family, const Realisation& omega, const DensityGrid& h_omega,
                                      std::span<const double> G, std::span<const double> H,
                                      std::span<const std::size_t> k_grid) {
  const std::size_t m = family.bins();
  if (h_omega.bins() != m || G.size() != m || H.size() != m)
    throw ContractViolation("correlation_decay: grid sizes differ");
  for (std::size_t i = 1; i < k_grid.size(); ++i)
    if (k_grid[i] <= k_grid[i - 1]) throw ContractViolation("correlation_decay: k-grid must be increasing");
  const double md = static_cast<double>(m);
  double mean_g = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean_g += G[i] * h_omega[i];
  mean_g /= md;
  std::vector<double> v(m), tmp(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = (G[i] - mean_g) * h_omega[i];
  std::vector<double> out;
  out.reserve(k_grid.size());
  std::size_t k = 0;
  for (std::size_t target : k_grid) {
    for (; k < target; ++k) {
      family.matrix(omega.symbol_at(static_cast<std::int64_t>(k))).apply(v, tmp);
      std::swap(v, tmp);
    }
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) c += H[i] * v[i];
    out.push_back(std::abs(c / md));
  }
  return out;
}

std::vector<double> correlation_decay(const UlamFamily& family, const Realisation& omega, std::size_t n_pull,
                                      std::span<const double> G, std::span<const double> H,
                                      std::span<const std::size_t> k_grid) {
  const auto h = quenched_density(family, omega, n_pull);
  return correlation_decay(family, omega, h.density, G, H, k_grid);
}

std::vector<double> annealed_correlation_decay(const UlamFamily& family, const DrivingConfig& config,
                                               std::size_t n_omega, std::size_t n_pull, std::span<const double> G,
                                               std::span<const double> H, std::span<const std::size_t> k_grid) {
  std::vector<double> sum(k_grid.size(), 0.0);
  for (const auto& omega : sample_realisations(config, n_omega)) {
    const auto lam = correlation_decay(family, omega, n_pull, G, H, k_grid);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += lam[i];
  }
  for (double& s : sum) s /= static_cast<double>(n_omega);
  return sum;
}

}  // namespace qhit
