#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "qhit/error.hpp"
#include "qhit/random.hpp"
#include "qhit/transfer.hpp"

using namespace qhit;

namespace {

Realisation fair(std::uint64_t seed) {
  DrivingConfig c;
  c.seed = seed;
  return Realisation(c);
}

const MapSystem& expanding() {
  static const MapSystem s({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(3)});
  return s;
}
const MapSystem& pm() {
  static const MapSystem s({FiberMap::pomeau_manneville(0.1), FiberMap::pomeau_manneville(0.3)});
  return s;
}

double max_abs_deviation(std::span<const double> v, double target) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x - target));
  return m;
}

}  // namespace

TEST_CASE("doubling Ulam matrix on two bins") {
  const UlamMatrix P = ulam_matrix(FiberMap::multiply_mod1(2), 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(P.entry(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("identity map gives the identity matrix") {
  const UlamMatrix P = ulam_matrix(FiberMap::multiply_mod1(1), 64);
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) REQUIRE(P.entry(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("every Ulam column sums to one") {
  std::vector<FiberMap> maps{FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(3), FiberMap::multiply_mod1(5),
                             FiberMap::pomeau_manneville(0.1), FiberMap::pomeau_manneville(0.3),
                             FiberMap::pomeau_manneville(0.7)};
  for (const auto& m : maps)
    for (std::size_t bins : {7, 100, 1024, 4096}) {
      const UlamMatrix P = ulam_matrix(m, bins);
      for (std::size_t j = 0; j < bins; ++j) REQUIRE(std::abs(P.column_sum(j) - 1.0) <= 1e-12);
    }
}

TEST_CASE("push_density examples") {
  const UlamMatrix P = ulam_matrix(FiberMap::multiply_mod1(2), 512);
  const DensityGrid pushed = push_density(P, DensityGrid::uniform(512));
  CHECK(max_abs_deviation(pushed.values(), 1.0) <= 1e-12);

  const UlamMatrix Q = ulam_matrix(FiberMap::pomeau_manneville(0.3), 256);
  std::vector<double> spike(256, 0.0);
  spike[37] = 256.0;
  const DensityGrid out = push_density(Q, DensityGrid(spike));
  for (std::size_t i = 0; i < 256; ++i) REQUIRE(out[i] == doctest::Approx(256.0 * Q.entry(i, 37)).epsilon(1e-12));
}

TEST_CASE("push_density preserves mass and nonnegativity") {
  CounterRng rng(3);
  for (const auto& m : pm().maps()) {
    const UlamMatrix P = ulam_matrix(m, 1000);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> v(1000);
      for (double& x : v) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
      const DensityGrid f = DensityGrid::normalized(v);
      const DensityGrid g = push_density(P, f);
      CHECK(std::abs(g.mass() - 1.0) <= 1e-10);
      for (double x : g.values()) REQUIRE(x >= 0.0);
    }
  }
}

TEST_CASE("uniform is fixed for integer slopes dividing the bin count") {
  for (unsigned s : {2u, 3u, 4u, 6u}) {
    const UlamMatrix P = ulam_matrix(FiberMap::multiply_mod1(s), 12 * 32);
    const DensityGrid g = push_density(P, DensityGrid::uniform(12 * 32));
    CHECK(max_abs_deviation(g.values(), 1.0) <= 1e-12);
  }
}

TEST_CASE("quenched densities of Lebesgue-preserving systems are uniform") {
  const MapSystem doubling({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(2)});
  const MapSystem tripling({FiberMap::multiply_mod1(3), FiberMap::multiply_mod1(3)});
  for (std::size_t n_pull : {1, 7, 50}) {
    CHECK(max_abs_deviation(quenched_density(doubling, fair(1), n_pull, 1024).density.values(), 1.0) <= 1e-10);
    CHECK(max_abs_deviation(quenched_density(tripling, fair(1), n_pull, 1024).density.values(), 1.0) <= 1e-10);
  }
  DrivingConfig skew;
  skew.weights = {0.8, 0.2};
  skew.seed = 4;
  const DensityGrid marginal = marginal_density(expanding(), skew, 6, 30, 1536);
  CHECK(max_abs_deviation(marginal.values(), 1.0) <= 1e-10);
  CHECK(std::abs(marginal.mass() - 1.0) <= 1e-10);
}

TEST_CASE("PM quenched density is largest near the neutral point") {
  const QuenchedDensity q = quenched_density(pm(), fair(5), 200, std::size_t{1} << 14);
  const auto h = q.density.values();
  CHECK(q.convergence < 1e-6);
  CHECK(h.front() > h.back());
  CHECK(*std::max_element(h.begin(), h.end()) == h.front());
  // Nonincreasing up to grid noise: block averages over 1/16 of the interval.
  std::vector<double> blocks(16, 0.0);
  for (std::size_t k = 0; k < h.size(); ++k) blocks[k * 16 / h.size()] += h[k];
  for (std::size_t b = 1; b < blocks.size(); ++b) CHECK(blocks[b] <= blocks[b - 1] * (1.0 + 1e-3));
}

TEST_CASE("single-map marginal equals that map's invariant density estimate") {
  const MapSystem single({FiberMap::pomeau_manneville(0.3)});
  DrivingConfig c;
  c.weights = {1.0};
  const DensityGrid marginal = marginal_density(single, c, 4, 100, 2048);
  const DensityGrid direct = quenched_density(single, Realisation(c), 100, 2048).density;
  CHECK(l1_distance(marginal.values(), direct.values()) <= 1e-12);
}

TEST_CASE("pullback convergence improves with depth for the expanding system") {
  // A nonuniform start shows the contraction; the uniform start is already fixed.
  const UlamFamily family(expanding(), 1024);
  const Realisation w = fair(8);
  std::vector<double> start(1024);
  for (std::size_t k = 0; k < start.size(); ++k) start[k] = 2.0 * (static_cast<double>(k) + 0.5) / 1024.0;
  double previous = INFINITY;
  for (std::size_t n : {5, 10, 20, 40}) {
    const auto a = family.push_along(w, -static_cast<std::int64_t>(n), n, start);
    const auto b = family.push_along(w, -static_cast<std::int64_t>(2 * n), 2 * n, start);
    const double d = l1_distance(a, b);
    CHECK(d <= previous);
    previous = d;
  }
}

TEST_CASE("quenched densities are shift-consistent") {
  const UlamFamily family(pm(), 2048);
  const Realisation w = fair(2);
  const QuenchedDensity deeper = quenched_density(family, w, 121);
  const QuenchedDensity next = quenched_density(family, w.shift(1), 120);
  const auto pushed = family.push_along(w, 0, 1, std::vector<double>(deeper.density.values().begin(), deeper.density.values().end()));
  const double tolerance = 2.0 * std::max(next.convergence, deeper.convergence) + 1e-12;
  CHECK(l1_distance(pushed, next.density.values()) <= tolerance);
}

TEST_CASE("invariance residual") {
  const MapSystem doubling({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(2)});
  CHECK(invariance_residual(doubling, fair(1), 1024, 20) <= 1e-10);
  const double r10 = invariance_residual(pm(), fair(1), 1 << 10, 200);
  const double r12 = invariance_residual(pm(), fair(1), 1 << 12, 200);
  const double r14 = invariance_residual(pm(), fair(1), 1 << 14, 200);
  CHECK(r12 <= r10 + 1e-6);
  CHECK(r14 <= r12 + 1e-6);
  CHECK(invariance_residual(pm(), fair(1), 1 << 10, 200) == r10);
}

TEST_CASE("grid variation") {
  CHECK(grid_variation(std::vector<double>(10, 1.0)) == 0.0);
  CHECK(grid_variation(std::vector<double>{0.0, 2.0, 0.0, 1.0}) == 5.0);
}

TEST_CASE("Doeblin-Fortet probe") {
  const MapSystem doubling({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(2)});
  const UlamFamily df(doubling, 1024);
  const DoeblinFortetFit half = doeblin_fortet_probe(df, fair(1), 1, 200, 5);
  CHECK(half.eta == doctest::Approx(0.5).epsilon(0.05));

  const auto flat = df.push_along(fair(1), 0, 3, std::vector<double>(1024, 1.0));
  CHECK(grid_variation(flat) <= 1e-12);

  const UlamFamily pf(pm(), 1 << 12);
  const DoeblinFortetFit fit = doeblin_fortet_probe(pf, fair(1), 20, 200, 5);
  CHECK(fit.eta < 1.0);
}

TEST_CASE("density grids reject invalid input") {
  CHECK_THROWS_AS(DensityGrid(std::vector<double>{2.0, 2.0}), ContractViolation);
  CHECK_THROWS_AS(DensityGrid(std::vector<double>{-1.0, 3.0}), ContractViolation);
  CHECK_THROWS_AS(DensityGrid::normalized(std::vector<double>(5, 0.0)), DomainError);
}
