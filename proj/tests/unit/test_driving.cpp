#include "doctest.h"

#include <cmath>
#include <cstdint>

#include "qhit/driving.hpp"
#include "qhit/error.hpp"

using namespace qhit;

namespace {
DrivingConfig fair(std::uint64_t seed) {
  DrivingConfig c;
  c.weights = {0.5, 0.5};
  c.seed = seed;
  return c;
}
}  // namespace

TEST_CASE("symbol queries are reproducible from seed and index") {
  const Realisation a(fair(42)), b(fair(42));
  for (std::int64_t i = -500; i <= 500; ++i) CHECK(a.symbol_at(i) == b.symbol_at(i));
}

TEST_CASE("degenerate weights always give the same symbol") {
  DrivingConfig c;
  c.weights = {1.0, 0.0};
  const Realisation w(c);
  for (std::int64_t i = -1000; i <= 1000; ++i) REQUIRE(w.symbol_at(i) == 0);
}

TEST_CASE("fair coin frequency over -10^4..10^4 lies in [0.48, 0.52]") {
  const Realisation w(fair(7));
  std::size_t zeros = 0, total = 0;
  for (std::int64_t i = -10000; i <= 10000; ++i, ++total) zeros += w.symbol_at(i) == 0;
  const double freq = static_cast<double>(zeros) / static_cast<double>(total);
  CHECK(freq >= 0.48);
  CHECK(freq <= 0.52);
}

TEST_CASE("shift is a group action and equivariant") {
  const Realisation w(fair(3));
  const Realisation same = w.shift(0);
  const Realisation back = w.shift(3).shift(-3);
  for (std::int64_t i = -200; i <= 200; ++i) {
    CHECK(same.symbol_at(i) == w.symbol_at(i));
    CHECK(back.symbol_at(i) == w.symbol_at(i));
  }
  CHECK(w.shift(5).symbol_at(0) == w.symbol_at(5));
  for (std::int64_t k : {-17, -1, 1, 9, 1000})
    for (std::int64_t i = -50; i <= 50; ++i) REQUIRE(w.shift(k).symbol_at(i) == w.symbol_at(i + k));
}

TEST_CASE("window frequencies are within 0.02 of the weights") {
  DrivingConfig c;
  c.weights = {0.2, 0.3, 0.5};
  c.seed = 11;
  const Realisation w(c);
  for (std::int64_t m : {-10000, 0, 10000}) {
    std::size_t counts[3] = {0, 0, 0};
    for (std::int64_t i = m; i <= m + 10000; ++i) ++counts[w.symbol_at(i)];
    for (std::size_t s = 0; s < 3; ++s) CHECK(std::abs(static_cast<double>(counts[s]) / 10001.0 - c.weights[s]) <= 0.02);
  }
}

TEST_CASE("sample_realisations seeds replicates") {
  const DrivingConfig c = fair(5);
  const auto one = sample_realisations(c, 1);
  REQUIRE(one.size() == 1);
  const Realisation base(c);
  for (std::int64_t i = -100; i <= 100; ++i) CHECK(one[0].symbol_at(i) == base.symbol_at(i));

  const auto two = sample_realisations(c, 2);
  bool differ = false;
  for (std::int64_t i = 0; i < 64; ++i) differ = differ || two[0].symbol_at(i) != two[1].symbol_at(i);
  CHECK(differ);

  const auto again = sample_realisations(c, 2);
  for (std::int64_t i = -100; i <= 100; ++i) CHECK(again[1].symbol_at(i) == two[1].symbol_at(i));
  CHECK(replicate_seed(c.seed, 0) == c.seed);
}

TEST_CASE("invalid weights are rejected") {
  DrivingConfig c;
  c.weights = {0.7, 0.7};
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c.weights = {1.2, -0.2};
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c.weights = {};
  CHECK_THROWS_AS(c.validate(), ContractViolation);
}
