#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qhit/error.hpp"
#include "qhit/measures.hpp"
#include "qhit/random.hpp"

using namespace qhit;

namespace {

Realisation fair(std::uint64_t seed) {
  DrivingConfig c;
  c.seed = seed;
  return Realisation(c);
}

DensityGrid step_density(std::size_t bins) {
  std::vector<double> v(bins, 0.0);
  for (std::size_t k = 0; k < bins / 2; ++k) v[k] = 2.0;
  return DensityGrid(v);
}

}  // namespace

TEST_CASE("ball_measure examples") {
  const DensityGrid u = DensityGrid::uniform(1000);
  CHECK(ball_measure(u, Ball(0.5, 0.01)) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(ball_measure(u, Ball(0.0, 0.01)) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(ball_measure(step_density(4096), Ball(0.25, 0.1)) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("ball_measure handles balls far below the bin width") {
  const DensityGrid f = step_density(16);
  CHECK(ball_measure(f, Ball(0.1, 1e-7)) == doctest::Approx(4e-7).epsilon(1e-9));
  CHECK(ball_measure(f, Ball(0.7, 1e-7)) == 0.0);
}

TEST_CASE("interval mass is additive and ball mass is monotone in rho") {
  CounterRng rng(5);
  std::vector<double> v(333);
  for (double& x : v) x = rng.uniform();
  const DensityGrid f = DensityGrid::normalized(v);
  for (int trial = 0; trial < 200; ++trial) {
    double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    if (a > b) std::swap(a, b);
    c = a + (b - a) * c;
    CHECK(interval_mass(f, {a, b}) == doctest::Approx(interval_mass(f, {a, c}) + interval_mass(f, {c, b})).epsilon(1e-12));
    const double x = rng.uniform();
    double prev = 0.0;
    for (double rho : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 0.5}) {
      const double m = ball_measure(f, Ball(x, rho));
      REQUIRE(m >= prev);
      prev = m;
    }
  }
}

TEST_CASE("sample_point examples") {
  const DensityGrid u = DensityGrid::uniform(64);
  CounterRng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(sample_point(u, a) == doctest::Approx(b.uniform()).epsilon(1e-14));

  std::vector<double> spike(64, 0.0);
  spike[10] = 64.0;
  const DensityGrid s(spike);
  CounterRng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_point(s, r);
    REQUIRE(x >= 10.0 / 64.0);
    REQUIRE(x <= 11.0 / 64.0);
  }
}

TEST_CASE("sample_point KS distance to the grid CDF at 1e5 samples") {
  std::vector<double> v(50);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 1.0 + std::sin(static_cast<double>(k));
  const DensityGrid f = DensityGrid::normalized(v);
  CounterRng rng(21);
  std::vector<double> xs(100000);
  for (double& x : xs) x = sample_point(f, rng);
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = interval_mass(f, {0.0, xs[i]});
    ks = std::max({ks, std::abs(F - static_cast<double>(i) / 1e5), std::abs(F - static_cast<double>(i + 1) / 1e5)});
  }
  CHECK(ks <= 0.01);
}

TEST_CASE("conditional_sample stays in the ball") {
  const DensityGrid u = DensityGrid::uniform(256);
  CounterRng rng(2);
  const Ball b(0.5, 0.1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = conditional_sample(u, b, rng);
    REQUIRE(b.contains(x));
    sum += x;
  }
  CHECK(std::abs(sum / 1e5 - 0.5) <= 0.002);

  const DensityGrid f = step_density(128);
  for (double c : {0.0, 0.3, 0.499, 1e-4})
    for (int i = 0; i < 1000; ++i) REQUIRE(Ball(c, 1e-3).contains(conditional_sample(f, Ball(c, 1e-3), rng)));
  CHECK_THROWS_AS(conditional_sample(f, Ball(0.8, 0.01), rng), DomainError);
}

TEST_CASE("annulus_ratio with uniform inputs") {
  const DensityGrid u = DensityGrid::uniform(100);
  for (double rho : {0.1, 0.01, 1e-3})
    for (double frac : {0.5, 0.25, 0.01}) {
      const double r = frac * rho;
      CHECK(std::abs(annulus_ratio(u, u, 0.5, rho, r) - 2.0 * r / rho) <= 1e-12);
    }
  double prev = INFINITY;
  for (double r : {5e-3, 1e-3, 1e-4, 1e-5}) {
    const double v = annulus_ratio(u, u, 0.4, 1e-2, r);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS(annulus_ratio(u, u, 0.5, 0.01, 0.02));
}

TEST_CASE("annulus ratio for the expanding system stays below 4 r / rho") {
  const MapSystem s({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(3)});
  const DensityGrid f = quenched_density(s, fair(1), 50, 4096).density;
  CounterRng rng(4);
  for (double rho : {1e-2, 1e-3})
    for (int i = 0; i < 50; ++i) {
      const double x = rng.uniform();
      CHECK(annulus_ratio(f, f, x, rho, rho / 10.0) <= 4.0 * 0.1);
    }
}

TEST_CASE("k_ratio_audit") {
  const DensityGrid u = DensityGrid::uniform(128);
  const std::vector<DensityGrid> same{u, u, u};
  const RatioRange one = k_ratio_audit(u, same, 0.3, 0.01);
  CHECK(one.min == doctest::Approx(1.0));
  CHECK(one.max == doctest::Approx(1.0));

  const MapSystem pm({FiberMap::pomeau_manneville(0.1), FiberMap::pomeau_manneville(0.3)});
  DrivingConfig c;
  c.seed = 3;
  std::vector<DensityGrid> ensemble;
  std::vector<double> avg(2048, 0.0);
  for (const auto& w : sample_realisations(c, 8)) {
    ensemble.push_back(quenched_density(pm, w, 100, 2048).density);
    for (std::size_t k = 0; k < 2048; ++k) avg[k] += ensemble.back()[k] / 8.0;
  }
  const DensityGrid marginal = DensityGrid::normalized(avg);
  for (double x : {0.05, 0.2, 0.5, 0.9}) {
    const RatioRange r = k_ratio_audit(marginal, ensemble, x, 1e-3);
    CHECK(r.min <= 1.0 + 1e-12);
    CHECK(r.max >= 1.0 - 1e-12);
    CHECK(std::isfinite(r.k_hat()));
  }

  const std::vector<DensityGrid> single{marginal};
  const RatioRange s = k_ratio_audit(marginal, single, 0.4, 1e-2);
  CHECK(s.min == doctest::Approx(1.0));
  CHECK(s.max == doctest::Approx(1.0));
}

TEST_CASE("scaling_audit examples") {
  const DensityGrid u = DensityGrid::uniform(1024);
  const std::vector<double> rho{1e-2, 1e-3, 1e-4};
  const std::vector<double> interior{0.2, 0.5, 0.77};
  const ScalingAudit a = scaling_audit(u, interior, rho);
  for (double s : a.slopes) CHECK(std::abs(s - 1.0) <= 0.01);
  const std::vector<double> edge{0.0};
  CHECK(scaling_audit(u, edge, rho).median == doctest::Approx(1.0).epsilon(1e-9));
  const std::vector<double> narrow{1e-2, 5e-3};
  CHECK_THROWS(scaling_audit(u, interior, narrow));

  const MapSystem pm({FiberMap::pomeau_manneville(0.1), FiberMap::pomeau_manneville(0.3)});
  const DensityGrid f = quenched_density(pm, fair(2), 200, 1 << 14).density;
  CounterRng rng(6);
  std::vector<double> centers(64);
  for (double& x : centers) x = rng.uniform();
  const ScalingAudit p = scaling_audit(f, centers, std::vector<double>{1e-2, 3e-3, 1e-3, 3e-4, 1e-4});
  CHECK(p.median >= 0.9);
  CHECK(p.median <= 1.1);
}

TEST_CASE("balls validate their inputs") {
  CHECK_THROWS_AS(Ball(1.5, 0.1), ContractViolation);
  CHECK_THROWS_AS(Ball(0.5, 0.0), ContractViolation);
  CHECK(Ball(0.99, 0.05).interval().hi == 1.0);
}
