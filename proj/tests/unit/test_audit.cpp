#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qhit/audit.hpp"
#include "qhit/error.hpp"

using namespace qhit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FittedExponent fit(const std::string& name, double value, bool super = false) {
  FittedExponent f;
  f.name = name;
  f.value = value;
  f.super_polynomial = super;
  f.variable = "n";
  f.range_lo = 1;
  f.range_hi = 100;
  return f;
}

struct Exponents {
  double kappa, xi, beta, d1, u0, kappa_prime, p;
  bool delta_super = false, lambda_super = false;
};

AssumptionReport report_with(const Exponents& e) {
  AssumptionReport r;
  r.system = "synthetic";
  for (const auto& id : assumption_ids()) r.entries.push_back({id, {}, Status::pass, ""});
  auto entry = [&](const std::string& id) -> AssumptionEntry& {
    for (auto& x : r.entries)
      if (x.id == id) return x;
    throw ContractViolation(id);
  };
  entry("I").fits.push_back(fit("p_annealed", e.p, e.lambda_super));
  entry("II").fits.push_back(fit("p_quenched", e.p, e.lambda_super));
  entry("III").fits.push_back(fit("d0", 0.95));
  entry("III").fits.push_back(fit("d1", e.d1));
  entry("IV").fits.push_back(fit("u0", e.u0));
  entry("V").fits.push_back(fit("kappa_prime", e.kappa_prime));
  entry("VI").fits.push_back(fit("kappa", e.kappa, e.delta_super));
  entry("VII").fits.push_back(fit("xi", e.xi));
  entry("VII").fits.push_back(fit("beta", e.beta));
  entry("VIII").fits.push_back(fit("K", 1.2));
  return r;
}

// Exponents the PM analysis assigns to alpha0 < alpha1, with eta and the
// slack on u0 and p small.
Exponents pm_exponents(double alpha0, double alpha1) {
  const double eta = 0.01;
  Exponents e{};
  e.kappa = 1.0 / alpha1;
  e.xi = e.beta = 1.0;
  e.d1 = 1.01;
  e.u0 = 0.99;
  e.kappa_prime = (1 + alpha0) / alpha1 - (1 + alpha1) / alpha0 - eta * (1 + alpha0) / alpha0;
  e.p = 1.0 / alpha1 - 1.0 - 0.01;
  return e;
}

const AuditBudgets& quick_budgets() {
  static const AuditBudgets b = [] {
    AuditBudgets x;
    x.bins = 1 << 11;
    x.n_pull = 100;
    x.ensemble = 8;
    x.corr_ensemble = 4;
    x.n_centers = 16;
    x.seed = 3;
    return x;
  }();
  return b;
}

}  // namespace

TEST_CASE("inequality status thresholds") {
  CHECK(inequality_status(2.0, ">", 1.0) == Status::pass);
  CHECK(inequality_status(1.05, ">", 1.0) == Status::warn);
  CHECK(inequality_status(0.9, ">", 1.0) == Status::fail);
  CHECK(inequality_status(0.5, "<", 1.0) == Status::pass);
  CHECK(inequality_status(0.97, "<", 1.0) == Status::warn);
  CHECK(inequality_status(1.0, ">=", 1.0) == Status::pass);
  CHECK(inequality_status(0.95, ">=", 1.0) == Status::pass);
  CHECK(inequality_status(0.8, ">=", 1.0) == Status::fail);
}

TEST_CASE("hand-evaluated case A ledger") {
  Exponents e{};
  e.kappa = 1.0 / 0.3;
  e.xi = e.beta = 1.0;
  e.d1 = 1.05;
  e.u0 = 0.95;
  e.kappa_prime = 0.1;
  e.p = 1.0 / 0.31 - 1.0;
  const CaseVerdict v = theorem_case_check(report_with(e));
  CHECK(v.verdict == "A");
  REQUIRE(v.satisfied.size() == 1);

  // max(1.05 / (10/3 - 1), 2.05 / 2.2258...) = 0.92100... < 0.95; gamma = 19/6 - 2.1 = 1.0666...
  const double first = 1.05 / (10.0 / 3.0 - 1.0);
  const double second = 2.05 / (1.0 / 0.31 - 1.0);
  CHECK(first == doctest::Approx(0.45));
  CHECK(second == doctest::Approx(0.921014).epsilon(1e-5));
  bool saw_max = false, saw_gamma = false;
  for (const auto& rec : v.ledger) {
    if (rec.case_id != "A") continue;
    if (rec.description.rfind("max(", 0) == 0) {
      CHECK(rec.lhs == doctest::Approx(std::max(first, second)));
      CHECK(rec.rhs == 0.95);
      CHECK(rec.holds);
      saw_max = true;
    }
    if (rec.description.rfind("gamma", 0) == 0) {
      CHECK(rec.lhs == doctest::Approx(10.0 / 3.0 * 0.95 - 2.0 - 0.1));
      CHECK(rec.holds);
      saw_gamma = true;
    }
  }
  CHECK(saw_max);
  CHECK(saw_gamma);
}

TEST_CASE("super-polynomial decay of delta and lambda gives case C") {
  Exponents e{};
  e.kappa = 40.0;
  e.delta_super = true;
  e.lambda_super = true;
  e.p = 30.0;
  e.xi = e.beta = 1.0;
  e.d1 = 1.0;
  e.u0 = 1.0;
  e.kappa_prime = 0.0;
  const CaseVerdict v = theorem_case_check(report_with(e));
  CHECK(v.verdict == "C");
  CHECK(v.satisfied.front() == "C");
  CHECK(std::find(v.satisfied.begin(), v.satisfied.end(), "B") != v.satisfied.end());
}

TEST_CASE("PM exponents satisfy case A below one third and fail above") {
  CHECK(theorem_case_check(report_with(pm_exponents(0.1, 0.3))).verdict == "A");
  CHECK(theorem_case_check(report_with(pm_exponents(0.1, 0.25))).verdict == "A");
  CHECK(theorem_case_check(report_with(pm_exponents(0.1, 0.4))).verdict == "none");
  CHECK(theorem_case_check(report_with(pm_exponents(0.2, 0.5))).verdict == "none");
}

TEST_CASE("the case check is pure arithmetic") {
  const AssumptionReport r = report_with(pm_exponents(0.1, 0.3));
  const CaseVerdict a = theorem_case_check(r), b = theorem_case_check(r);
  CHECK(a.verdict == b.verdict);
  CHECK(a.ledger == b.ledger);
}

TEST_CASE("missing fits are reported by name") {
  AssumptionReport r;
  CHECK_THROWS_WITH_AS(theorem_case_check(r), doctest::Contains("kappa"), ContractViolation);
}

TEST_CASE("reports round-trip through JSON") {
  AssumptionReport r = report_with(pm_exponents(0.1, 0.3));
  r.entries[0].fits[0].value = kInf;
  r.entries[0].fits[0].super_polynomial = true;
  r.entries[3].evidence = "slope \"quoted\" text";
  r.entries[4].status = Status::warn;
  const AssumptionReport back = report_from_json(to_json(r));
  CHECK(back == r);
  CHECK_THROWS(report_from_json("{not json"));
}

TEST_CASE("expanding system passes every assumption and lands in case C") {
  const MapSystem s({FiberMap::multiply_mod1(2), FiberMap::multiply_mod1(3)});
  DrivingConfig d;
  d.seed = 1;
  const AssumptionReport r = run_audit(s, d, quick_budgets());
  REQUIRE(r.entries.size() == 9);
  for (const auto& e : r.entries) CHECK_MESSAGE(e.status == Status::pass, e.id << ": " << e.evidence);
  CHECK(r.require("kappa_prime").value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.require("xi").value == doctest::Approx(1.0).epsilon(0.1));
  CHECK(r.require("beta").value == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::isfinite(r.require("K").value));
  CHECK(theorem_case_check(r).verdict == "C");
  CHECK(render_text(r, theorem_case_check(r)).find("Case check: C") != std::string::npos);
}

TEST_CASE("single doubling map passes with geometric correlation decay") {
  const MapSystem s({FiberMap::multiply_mod1(2)});
  DrivingConfig d;
  d.weights = {1.0};
  const AssumptionReport r = run_audit(s, d, quick_budgets());
  for (const auto& e : r.entries) CHECK_MESSAGE(e.status == Status::pass, e.id << ": " << e.evidence);
  CHECK(r.require("p_quenched").super_polynomial);
}

TEST_CASE("PM with alpha1 above one third fails the case check while its assumptions pass") {
  const MapSystem s({FiberMap::pomeau_manneville(0.1), FiberMap::pomeau_manneville(0.4)});
  DrivingConfig d;
  d.seed = 2;
  const AssumptionReport r = run_audit(s, d, quick_budgets());
  for (const auto& e : r.entries) CHECK_MESSAGE(e.status != Status::fail, e.id << ": " << e.evidence);
  CHECK(theorem_case_check(r).verdict == "none");
}

TEST_CASE("budgets are validated") {
  AuditBudgets b;
  b.rho_grid = {1e-2};
  CHECK_THROWS(b.validate());
  b = AuditBudgets{};
  b.ensemble = 0;
  CHECK_THROWS(b.validate());
}
