#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qhit/error.hpp"
#include "qhit/interval_maps.hpp"
#include "qhit/random.hpp"

using namespace qhit;

namespace {

Realisation fair(std::uint64_t seed) {
  DrivingConfig c;
  c.seed = seed;
  return Realisation(c);
}

Realisation constant_symbol(std::size_t symbol, std::size_t alphabet) {
  DrivingConfig c;
  c.weights.assign(alphabet, 0.0);
  c.weights[symbol] = 1.0;
  return Realisation(c);
}

const MapSystem& doubling() {
  static const MapSystem s({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(2)});
  return s;
}
const MapSystem& expanding() {
  static const MapSystem s({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(3)});
  return s;
}
const MapSystem& pm() {
  static const MapSystem s({FiberMap::pomeau_manneville(0.1), FiberMap::pomeau_manneville(0.3)});
  return s;
}

// Van der Corput points in (0, 1).
double quasi(std::size_t i) {
  double x = 0.0, scale = 0.5;
  for (std::size_t k = i + 1; k; k >>= 1, scale *= 0.5)
    if (k & 1) x += scale;
  return x;
}

}  // namespace

TEST_CASE("PM apply examples") {
  const FiberMap half = FiberMap::pomeau_manneville(0.5);
  CHECK(apply(half, 0.0) == 0.0);
  for (double a : {0.1, 0.3, 0.5, 0.9}) CHECK(apply(FiberMap::pomeau_manneville(a), 0.75) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(apply(half, 0.25) == doctest::Approx(0.25 * (1.0 + std::sqrt(2.0) * 0.5)).epsilon(1e-14));
  CHECK(apply(half, 0.25) == doctest::Approx(0.426776695).epsilon(1e-9));
}

TEST_CASE("derivative examples") {
  CHECK(derivative(FiberMap::pomeau_manneville(0.5), 0.0) == 1.0);
  for (double a : {0.1, 0.3, 0.5}) CHECK(derivative(FiberMap::pomeau_manneville(a), 0.75) == 2.0);
  CHECK(derivative(FiberMap::multiply_mod1(2), 0.3) == 2.0);
}

TEST_CASE("inverse_branch examples") {
  CHECK(inverse_branch(FiberMap::multiply_mod1(2), 0, 0.5) == 0.25);
  for (double a : {0.1, 0.3}) CHECK(inverse_branch(FiberMap::pomeau_manneville(a), 1, 0.0) == 0.5);
  CHECK(std::abs(inverse_branch(FiberMap::pomeau_manneville(0.5), 0, 0.426776695) - 0.25) <= 1e-9);
  const double y = 0.25 * (1.0 + std::sqrt(2.0) * 0.5);
  CHECK(std::abs(inverse_branch(FiberMap::pomeau_manneville(0.5), 0, y) - 0.25) <= 1e-10);
}

TEST_CASE("inverse branches round trip on every branch") {
  std::vector<FiberMap> maps{FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(3), FiberMap::multiply_mod1(7),
                             FiberMap::pomeau_manneville(0.05), FiberMap::pomeau_manneville(0.3),
                             FiberMap::pomeau_manneville(0.9)};
  for (const auto& m : maps)
    for (std::size_t b = 0; b < m.branch_count(); ++b)
      for (std::size_t i = 0; i < 1000; ++i) {
        const double y = quasi(i);
        REQUIRE(std::abs(m.branch(b).apply(inverse_branch(m, b, y)) - y) <= 1e-10);
      }
}

TEST_CASE("apply is strictly increasing on each branch") {
  for (const auto& m : pm().maps())
    for (const auto& br : m.branches()) {
      double prev = -1.0;
      for (int k = 0; k < 2000; ++k) {
        const double x = br.lo() + br.length() * k / 2000.0;
        const double y = br.apply(x);
        REQUIRE(y > prev);
        prev = y;
      }
    }
}

TEST_CASE("clamped coefficient branch is clamped at 1") {
  const FiberMap m = FiberMap::pomeau_manneville(0.3, PmCoefficient::clamped);
  CHECK(m.branch(0).apply(0.49) <= 1.0);
  CHECK(m.branch(0).image().hi == 1.0);
}

TEST_CASE("compose_apply examples") {
  const Realisation w = fair(1);
  CHECK(compose_apply(pm(), w, 0, 0.3141) == 0.3141);
  CHECK(compose_apply(doubling(), w, 4, 0.2) == doctest::Approx(0.2).epsilon(1e-12));
  DrivingConfig c;
  c.seed = 0;
  // Find a realisation reading (0, 1) at indices 0, 1.
  Realisation zero_one = w;
  for (std::int64_t k = 0;; ++k) {
    const Realisation s = w.shift(k);
    if (s.symbol_at(0) == 0 && s.symbol_at(1) == 1) {
      zero_one = s;
      break;
    }
  }
  CHECK(compose_apply(expanding(), zero_one, 2, 0.1) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("image_of_interval examples") {
  const Realisation w = fair(2);
  const IntervalUnion same = image_of_interval(pm(), w, 0, {0.2, 0.3});
  REQUIRE(same.size() == 1);
  CHECK(same.intervals()[0] == Interval{0.2, 0.3});

  const IntervalUnion split = image_of_interval(doubling(), w, 1, {0.4, 0.6});
  REQUIRE(split.size() == 2);
  CHECK(split.intervals()[0].lo == 0.0);
  CHECK(split.intervals()[0].hi == doctest::Approx(0.2));
  CHECK(split.intervals()[1].lo == doctest::Approx(0.8));
  CHECK(split.intervals()[1].hi == 1.0);

  for (std::size_t n : {1, 3, 10}) {
    const IntervalUnion all = image_of_interval(doubling(), w, n, {0.0, 1.0});
    REQUIRE(all.size() == 1);
    CHECK(all.intervals()[0] == Interval{0.0, 1.0});
  }
}

TEST_CASE("image_of_interval contains every sampled image point") {
  const Realisation w = fair(9);
  CounterRng rng(17);
  for (const MapSystem* s : {&expanding(), &pm()})
    for (std::size_t n : {1, 2, 5}) {
      const Interval J{0.31, 0.3125 + 0.01 * static_cast<double>(n)};
      const IntervalUnion img = image_of_interval(*s, w, n, J);
      for (int i = 0; i < 10000; ++i) {
        const double x = J.lo + J.length() * rng.uniform();
        REQUIRE(img.contains(compose_apply(*s, w, n, x), 1e-12));
      }
    }
}

TEST_CASE("cylinder partitions") {
  const Realisation w = fair(4);
  const auto dyadic = cylinder_partition(doubling(), w, 3);
  REQUIRE(dyadic.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(dyadic.cell(i).length() == 0.125);

  const MapSystem two({FiberMap::multiply_mod1(2), FiberMap::pomeau_manneville(0.2)});
  const auto cells = cylinder_partition(two, w, 5);
  CHECK(cells.size() == 32);
  CHECK(cells.edges().front() == 0.0);
  CHECK(cells.edges().back() == 1.0);

  const auto pm2 = cylinder_partition(pm(), w, 2);
  CHECK(pm2.size() == 4);
  CHECK(pm2.cell(0).contains(0.0));
}

TEST_CASE("depth n+1 cylinders refine depth n") {
  const Realisation w = fair(6);
  for (const MapSystem* s : {&expanding(), &pm()})
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto coarse = cylinder_partition(*s, w, n);
      const auto fine = cylinder_partition(*s, w, n + 1);
      for (double e : coarse.edges()) {
        const bool found = std::any_of(fine.edges().begin(), fine.edges().end(),
                                       [&](double f) { return std::abs(f - e) <= 1e-15; });
        REQUIRE(found);
      }
    }
}

TEST_CASE("cylinder partition cap fails loudly") {
  CHECK_THROWS_AS(cylinder_partition(expanding(), fair(1), 30, 1024), ResourceError);
}

TEST_CASE("diameter profile examples") {
  const auto d2 = cylinder_diameter_profile(doubling(), fair(1), 40);
  for (std::size_t n = 1; n <= 40; ++n) CHECK(d2[n - 1] == std::ldexp(1.0, -static_cast<int>(n)));
  const MapSystem tripling({FiberMap::multiply_mod1(3), FiberMap::multiply_mod1(3)});
  const auto d3 = cylinder_diameter_profile(tripling, fair(1), 20);
  for (std::size_t n = 1; n <= 20; ++n) CHECK(d3[n - 1] == doctest::Approx(std::pow(3.0, -static_cast<double>(n))).epsilon(1e-14));
}

TEST_CASE("diameter profile is nonincreasing and matches exact enumeration") {
  const Realisation w = fair(12);
  for (const MapSystem* s : {&expanding(), &pm()}) {
    const auto d = cylinder_diameter_profile(*s, w, 14);
    for (std::size_t n = 1; n < d.size(); ++n) CHECK(d[n] <= d[n - 1]);
    for (std::size_t n = 1; n <= 12; ++n) CHECK(d[n - 1] == doctest::Approx(cylinder_partition(*s, w, n).max_length()).epsilon(1e-12));
  }
  // Product of the longest branch lengths along the word.
  const auto d = cylinder_diameter_profile(expanding(), w, 30);
  double product = 1.0;
  for (std::size_t n = 1; n <= 30; ++n) {
    product /= w.symbol_at(static_cast<std::int64_t>(n) - 1) == 0 ? 2.0 : 3.0;
    CHECK(d[n - 1] == doctest::Approx(product).epsilon(1e-13));
  }
}

TEST_CASE("PM diameter on a random realisation is no slower than the bound") {
  // The sup over omega sits on the constant realisation of the alpha1 map;
  // a random realisation's longest cylinder decays at least as fast.
  const auto slow = cylinder_diameter_profile(pm(), constant_symbol(1, 2), 60);
  const auto random = cylinder_diameter_profile(pm(), fair(3), 60);
  for (std::size_t n = 20; n <= 60; ++n) CHECK(random[n - 1] <= slow[n - 1] * (1.0 + 1e-12));
}

TEST_CASE("distortion is exactly one for affine systems") {
  for (double theta : distortion_profile(doubling(), fair(1), 10)) CHECK(theta == 1.0);
  for (double theta : distortion_profile(expanding(), fair(2), 10)) CHECK(theta == 1.0);
}

TEST_CASE("PM distortion is finite and grows") {
  const auto theta = distortion_profile(pm(), fair(3), 10);
  for (double t : theta) {
    CHECK(std::isfinite(t));
    CHECK(t >= 1.0);
  }
  CHECK(theta.back() >= theta.front());
}

TEST_CASE("expansion constant") {
  CHECK(expansion_constant(doubling()) == 2.5);
  // sup over maps of (sup|DT| + 1/inf|DT|): max(2 + 1/2, 3 + 1/3).
  CHECK(expansion_constant(expanding()) == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  // sup|DT| = 2 + alpha1 at x -> 1/2 from the left, inf|DT| = 1 at 0.
  CHECK(expansion_constant(pm()) == doctest::Approx(2.3 + 1.0).epsilon(1e-12));
}

TEST_CASE("invalid maps are rejected") {
  CHECK_THROWS(FiberMap::multiply_mod1(0));
  CHECK_THROWS(FiberMap::pomeau_manneville(0.0));
  CHECK_THROWS(FiberMap({Branch::affine(0.0, 0.5, 2.0, 0.0)}, "partial"));
}

TEST_CASE("driving alphabet larger than the map system is a contract violation") {
  const MapSystem single({FiberMap::multiply_mod1(2)});
  CHECK_THROWS_WITH_AS(compose_apply(single, fair(1), 8, 0.3), doctest::Contains("no fiber map"), ContractViolation);
  DrivingConfig c;
  c.weights = {1.0};
  CHECK(compose_apply(single, Realisation(c), 2, 0.3) == doctest::Approx(0.2));
}
