#include "doctest.h"

#include <cmath>
#include <vector>

#include "qhit/error.hpp"
#include "qhit/fit.hpp"

using namespace qhit;

TEST_CASE("least squares recovers a line") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{3, 5, 7, 9, 11};
  const LinearFit f = least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.rms_residual == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS(least_squares(std::vector<double>{1, 1}, std::vector<double>{1, 2}));
}

TEST_CASE("log-log and semilog fits") {
  std::vector<double> x, power, geometric;
  for (int k = 1; k <= 20; ++k) {
    x.push_back(k);
    power.push_back(3.0 * std::pow(k, -2.5));
    geometric.push_back(std::pow(0.5, k));
  }
  CHECK(loglog_fit(x, power).slope == doctest::Approx(-2.5));
  CHECK(semilog_fit(x, geometric).slope == doctest::Approx(std::log(0.5)));
  const LinearFit floored = semilog_fit(x, geometric, 1e-3);
  CHECK(floored.points == 9);
}

TEST_CASE("two-regressor least squares") {
  std::vector<double> u, v, y;
  for (int i = 0; i < 30; ++i) {
    u.push_back(std::sin(i));
    v.push_back(std::cos(3.0 * i));
    y.push_back(0.5 + 2.0 * u.back() - 1.5 * v.back());
  }
  const TwoRegressorFit f = least_squares2(u, v, y);
  CHECK(f.a == doctest::Approx(2.0));
  CHECK(f.b == doctest::Approx(-1.5));
  CHECK(f.intercept == doctest::Approx(0.5));
}

TEST_CASE("decay classification") {
  std::vector<double> k, poly, expo;
  for (double x = 1; x <= 128; x *= std::sqrt(2.0)) {
    k.push_back(x);
    poly.push_back(std::pow(x, -1.7));
    expo.push_back(std::exp(-0.3 * x));
  }
  const DecayFit p = classify_decay(k, poly);
  CHECK_FALSE(p.super_polynomial);
  CHECK(p.exponent == doctest::Approx(1.7));
  CHECK(classify_decay(k, expo, 1e-300).super_polynomial);
  CHECK_THROWS_AS(classify_decay(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0.5, 0.2}), DomainError);
}
