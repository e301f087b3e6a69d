#include "qhit/fit.hpp"

#include <cmath>
#include <vector>

#include "qhit/error.hpp"

namespace qhit {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractViolation("least_squares: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw ContractViolation("least_squares: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ContractViolation("least_squares: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

LinearFit loglog_fit(std::span<const double> x, std::span<const double> y, double floor) {
  if (x.size() != y.size()) throw ContractViolation("loglog_fit: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > floor && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  return least_squares(lx, ly);
}

LinearFit semilog_fit(std::span<const double> x, std::span<const double> y, double floor) {
  if (x.size() != y.size()) throw ContractViolation("semilog_fit: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > floor && y[i] > 0.0) {
      lx.push_back(x[i]);
      ly.push_back(std::log(y[i]));
    }
  return least_squares(lx, ly);
}

TwoRegressorFit least_squares2(std::span<const double> u, std::span<const double> v, std::span<const double> y) {
  const std::size_t n = y.size();
  if (u.size() != n || v.size() != n) throw ContractViolation("least_squares2: length mismatch");
  if (n < 3) throw ContractViolation("least_squares2: need at least three points");
  double mu = 0, mv = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mu += u[i];
    mv += v[i];
    my += y[i];
  }
  mu /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double suu = 0, svv = 0, suv = 0, suy = 0, svy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double du = u[i] - mu, dv = v[i] - mv, dy = y[i] - my;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
    suy += du * dy;
    svy += dv * dy;
  }
  const double det = suu * svv - suv * suv;
  if (!(std::abs(det) > 1e-14 * std::max(1.0, suu * svv)))
    throw ContractViolation("least_squares2: regressors are collinear");
  TwoRegressorFit fit;
  fit.a = (suy * svv - svy * suv) / det;
  fit.b = (svy * suu - suy * suv) / det;
  fit.intercept = my - fit.a * mu - fit.b * mv;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.a * u[i] - fit.b * v[i];
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

DecayFit classify_decay(std::span<const double> x, std::span<const double> y, double floor,
                        double growth_threshold) {
  if (x.size() != y.size()) throw ContractViolation("classify_decay: length mismatch");
  std::vector<double> kx, ky;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > floor && y[i] > 0.0) {
      kx.push_back(x[i]);
      ky.push_back(y[i]);
    }
  if (kx.size() < 4) throw DomainError("classify_decay: fewer than four usable points");
  DecayFit out;
  out.points = kx.size();
  out.x_lo = kx.front();
  out.x_hi = kx.back();
  out.exponent = -loglog_fit(kx, ky).slope;
  const std::size_t half = kx.size() / 2;
  const std::span<const double> sx(kx), sy(ky);
  out.first_half_slope = loglog_fit(sx.first(half + 1), sy.first(half + 1)).slope;
  out.second_half_slope = loglog_fit(sx.subspan(half), sy.subspan(half)).slope;
  const double a = std::abs(out.first_half_slope);
  const double b = std::abs(out.second_half_slope);
  out.super_polynomial = out.second_half_slope < 0.0 && b > (1.0 + growth_threshold) * a;
  return out;
}

}  // namespace qhit
