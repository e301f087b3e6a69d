#include "qhit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"
#include <sstream>
#include <stdexcept>

#include "qhit/error.hpp"
#include "qhit/fit.hpp"
#include "qhit/measures.hpp"
#include "qhit/quenched_law.hpp"
#include "qhit/random.hpp"
#include "qhit/transfer.hpp"

namespace qhit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::warn:
      return "warn";
    case Status::fail:
      return "fail";
  }
  return "fail";
}

Status status_from_string(const std::string& s) {
  if (s == "pass") return Status::pass;
  if (s == "warn") return Status::warn;
  if (s == "fail") return Status::fail;
  throw ContractViolation("unknown status '" + s + "'");
}

double FittedExponent::effective() const noexcept { return super_polynomial ? kInf : value; }

const std::vector<std::string>& assumption_ids() {
  static const std::vector<std::string> ids{"I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"};
  return ids;
}

const AssumptionEntry& AssumptionReport::entry(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return e;
  throw ContractViolation("report has no assumption " + id);
}

std::optional<FittedExponent> AssumptionReport::find(const std::string& name) const {
  for (const auto& e : entries)
    for (const auto& f : e.fits)
      if (f.name == name) return f;
  return std::nullopt;
}

FittedExponent AssumptionReport::require(const std::string& name) const {
  auto f = find(name);
  if (!f) throw ContractViolation("report is missing the fitted quantity '" + name + "'");
  return *f;
}

Status inequality_status(double lhs, const std::string& relation, double rhs, double margin) {
  if (std::isnan(lhs) || std::isnan(rhs)) return Status::fail;
  const bool less = relation == "<" || relation == "<=";
  if (!less && relation != ">" && relation != ">=") throw ContractViolation("unknown relation " + relation);
  // gap > 0 means satisfied.
  const double gap = less ? rhs - lhs : lhs - rhs;
  if (std::isinf(gap)) return gap > 0 ? Status::pass : Status::fail;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  const double rel = gap / scale;
  if (relation.size() == 2) return rel >= -margin ? Status::pass : Status::fail;
  if (rel >= margin) return Status::pass;
  return rel > 0.0 ? Status::warn : Status::fail;
}

void AuditBudgets::validate() const {
  if (bins < 2 || n_pull == 0 || ensemble == 0 || corr_ensemble == 0 || n_centers == 0)
    throw ContractViolation("audit budgets must be positive");
  if (rho_grid.size() < 2 || annulus_fractions.empty() || k_grid.size() < 4)
    throw ContractViolation("audit budgets: grids are too short");
  if (diameter_n_lo == 0 || diameter_n_hi < diameter_n_lo + 3 || distortion_n_max < 4)
    throw ContractViolation("audit budgets: fit ranges are too short");
  for (double q : annulus_fractions)
    if (!(q > 0.0 && q < 1.0)) throw ContractViolation("audit budgets: annulus fractions must lie in (0, 1)");
  if (!(center_margin >= 0.0 && center_margin < 1.0)) throw ContractViolation("audit budgets: bad center margin");
}

namespace {

Status worst(Status a, Status b) { return static_cast<int>(a) > static_cast<int>(b) ? a : b; }

template <class Fn>
AssumptionEntry guarded(const std::string& id, Fn&& fn) {
  const std::string prefix = "assumption " + id + ": ";
  try {
    AssumptionEntry e = fn();
    e.id = id;
    return e;
  } catch (const ResourceError& err) {
    throw ResourceError(prefix + err.what());
  } catch (const DomainError& err) {
    throw DomainError(prefix + err.what());
  } catch (const ContractViolation& err) {
    throw ContractViolation(prefix + err.what());
  } catch (const std::exception& err) {
    throw std::runtime_error(prefix + err.what());
  }
}

FittedExponent decay_exponent(const std::string& name, std::span<const std::size_t> k_grid,
                              std::span<const double> lambda, double floor) {
  std::vector<double> k(k_grid.begin(), k_grid.end());
  FittedExponent f{name, 0.0, false, "k", k.front(), k.back()};
  try {
    const DecayFit d = classify_decay(k, lambda, floor);
    f.value = d.exponent;
    f.super_polynomial = d.super_polynomial;
    f.range_lo = d.x_lo;
    f.range_hi = d.x_hi;
  } catch (const DomainError&) {
    // Fewer than four values above the floor: decay already at round-off.
    f.super_polynomial = true;
  }
  return f;
}

double square(double x) { return x * x; }

std::vector<double> draw_centers(const DensityGrid& f, std::size_t n, double margin, std::uint64_t seed) {
  std::vector<double> out;
  const CounterRng base(seed);
  for (std::size_t i = 0; out.size() < n; ++i) {
    if (i > 1000 * n) throw DomainError("could not draw centers outside the margin");
    CounterRng rng = base.substream(i);
    const double x = sample_point(f, rng);
    if (x >= margin) out.push_back(x);
  }
  return out;
}

struct AnnulusFit {
  double xi = 0.0;
  double beta = 0.0;
};

AnnulusFit annulus_fit(const std::vector<DensityGrid>& quenched, const DensityGrid* marginal,
                       std::span<const double> centers, std::span<const double> rho_grid,
                       std::span<const double> fractions) {
  std::vector<double> log_r, log_rho, log_ratio;
  for (double rho : rho_grid)
    for (double q : fractions) {
      const double r = q * rho;
      double sum = 0.0;
      std::size_t used = 0;
      for (double x : centers) {
        double sup = 0.0;
        for (const auto& f : quenched) sup = std::max(sup, annulus_ratio(f, marginal ? *marginal : f, x, rho, r));
        if (sup > 0.0) {
          sum += std::log(sup);
          ++used;
        }
      }
      if (used == 0) continue;
      log_r.push_back(std::log(r));
      log_rho.push_back(std::log(rho));
      log_ratio.push_back(sum / static_cast<double>(used));
    }
  const auto fit = least_squares2(log_r, log_rho, log_ratio);
  return {fit.a, -fit.b};
}

Realisation constant_realisation(std::size_t alphabet, Symbol s) {
  DrivingConfig c;
  c.weights.assign(alphabet, 0.0);
  c.weights[s] = 1.0;
  return Realisation(c);
}

/// Symbols whose constant realisation attains sup over omega of the longest
/// n-cylinder. For affine systems that is every symbol (the exact product is
/// cheap); otherwise the map with the largest neutral-point exponent, whose
/// inverse branch near 0 is the least contracting.
std::vector<Symbol> diameter_symbols(const MapSystem& system) {
  std::vector<Symbol> out;
  if (system.all_affine()) {
    for (Symbol s = 0; s < system.alphabet_size(); ++s) out.push_back(s);
    return out;
  }
  Symbol best = 0;
  double best_alpha = -1.0;
  for (Symbol s = 0; s < system.alphabet_size(); ++s)
    for (const auto& b : system.map(s).branches())
      if (b.kind() == BranchKind::pm_left && b.alpha() > best_alpha) {
        best_alpha = b.alpha();
        best = s;
      }
  out.push_back(best);
  return out;
}

}  // namespace

AssumptionReport run_audit(const MapSystem& system, const DrivingConfig& driving, const AuditBudgets& budgets) {
  budgets.validate();
  driving.validate();
  if (driving.alphabet_size() != system.alphabet_size())
    throw ContractViolation("audit: driving alphabet and map system differ in size");

  AssumptionReport report;
  for (const auto& m : system.maps()) report.system += (report.system.empty() ? "" : ", ") + m.label();

  const UlamFamily family(system, budgets.bins);
  const auto ensemble = sample_realisations(driving, budgets.ensemble);
  std::vector<DensityGrid> quenched;
  quenched.reserve(ensemble.size());
  std::vector<double> sum(budgets.bins, 0.0);
  for (const auto& omega : ensemble) {
    quenched.push_back(quenched_density(family, omega, budgets.n_pull).density);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += quenched.back()[k];
  }
  const DensityGrid marginal = DensityGrid::normalized(std::move(sum));
  const auto centers = draw_centers(marginal, budgets.n_centers, budgets.center_margin, budgets.seed);
  const auto G = sample_on_grid(budgets.bins, square);
  const auto [rho_lo, rho_hi] = std::minmax_element(budgets.rho_grid.begin(), budgets.rho_grid.end());

  report.entries.push_back(guarded("I", [&] {
    const auto lam = annealed_correlation_decay(family, driving, budgets.corr_ensemble, budgets.n_pull, G, G,
                                                budgets.k_grid);
    auto f = decay_exponent("p_annealed", budgets.k_grid, lam, budgets.decay_floor);
    return AssumptionEntry{"", {f}, inequality_status(f.effective(), ">", 1.0),
                           "annealed lambda(k) for G = H = x^2 averaged over " +
                               std::to_string(budgets.corr_ensemble) + " realisations"};
  }));

  report.entries.push_back(guarded("II", [&] {
    const auto lam = correlation_decay(family, ensemble.front(), quenched.front(), G, G, budgets.k_grid);
    auto f = decay_exponent("p_quenched", budgets.k_grid, lam, budgets.decay_floor);
    return AssumptionEntry{"", {f}, inequality_status(f.effective(), ">", 1.0),
                           "quenched lambda(k) for G = H = x^2 on the first realisation"};
  }));

  report.entries.push_back(guarded("III", [&] {
    const auto s = scaling_audit(marginal, centers, budgets.rho_grid);
    FittedExponent d0{"d0", s.min, false, "rho", *rho_lo, *rho_hi};
    FittedExponent d1{"d1", s.max, false, "rho", *rho_lo, *rho_hi};
    return AssumptionEntry{"", {d0, d1}, inequality_status(s.min, ">", 0.0),
                           "log mu(B) against log rho at " + std::to_string(s.slopes.size()) + " centers, " +
                               std::to_string(s.excluded) + " excluded"};
  }));

  report.entries.push_back(guarded("IV", [&] {
    double u0 = kInf;
    std::size_t excluded = 0;
    for (const auto& q : quenched) {
      const auto s = scaling_audit(q, centers, budgets.rho_grid);
      u0 = std::min(u0, s.min);
      excluded += s.excluded;
    }
    FittedExponent f{"u0", u0, false, "rho", *rho_lo, *rho_hi};
    return AssumptionEntry{"", {f}, inequality_status(u0, ">", 0.0),
                           "min slope of log mu^omega(B) against log rho over the ensemble, " +
                               std::to_string(excluded) + " zero-mass balls excluded"};
  }));

  report.entries.push_back(guarded("V", [&] {
    const std::size_t n_max = budgets.distortion_n_max;
    std::vector<double> theta(n_max, 1.0);
    const std::size_t count = std::min(budgets.corr_ensemble, ensemble.size());
    for (std::size_t i = 0; i < count; ++i) {
      const auto p = distortion_profile(system, ensemble[i], n_max, budgets.cell_cap);
      for (std::size_t n = 0; n < n_max; ++n) theta[n] = std::max(theta[n], p[n]);
    }
    std::vector<double> n_axis, log_theta;
    for (std::size_t n = 2; n <= n_max; ++n) {
      n_axis.push_back(std::log(static_cast<double>(n)));
      log_theta.push_back(std::log(theta[n - 1]));
    }
    const double slope = least_squares(n_axis, log_theta).slope;
    const bool finite = std::all_of(theta.begin(), theta.end(), [](double t) { return std::isfinite(t); });
    FittedExponent f{"kappa_prime", std::max(0.0, slope), false, "n", 2.0, static_cast<double>(n_max)};
    const Status st = finite ? inequality_status(f.value, ">=", 0.0) : Status::fail;
    return AssumptionEntry{"", {f}, st,
                           "Theta(n) over full n-cylinders, max over " + std::to_string(count) +
                               " realisations; Theta(n_max) = " + std::to_string(theta.back())};
  }));

  report.entries.push_back(guarded("VI", [&] {
    const std::size_t n_hi = budgets.diameter_n_hi;
    std::vector<double> delta(n_hi, 0.0);
    for (Symbol s : diameter_symbols(system)) {
      const auto p = cylinder_diameter_profile(system, constant_realisation(system.alphabet_size(), s), n_hi,
                                               budgets.cell_cap);
      for (std::size_t n = 0; n < n_hi; ++n) delta[n] = std::max(delta[n], p[n]);
    }
    std::vector<double> n_axis, d;
    for (std::size_t n = budgets.diameter_n_lo; n <= n_hi; ++n) {
      n_axis.push_back(static_cast<double>(n));
      d.push_back(delta[n - 1]);
    }
    const DecayFit fit = classify_decay(n_axis, d);
    FittedExponent f{"kappa", fit.exponent, fit.super_polynomial, "n", fit.x_lo, fit.x_hi};
    return AssumptionEntry{"", {f}, inequality_status(f.effective(), ">", 1.0),
                           "sup over omega of the longest n-cylinder, attained on constant realisations"};
  }));

  report.entries.push_back(guarded("VII", [&] {
    const auto a = annulus_fit(quenched, &marginal, centers, budgets.rho_grid, budgets.annulus_fractions);
    FittedExponent xi{"xi", a.xi, false, "rho", *rho_lo, *rho_hi};
    FittedExponent beta{"beta", a.beta, false, "rho", *rho_lo, *rho_hi};
    return AssumptionEntry{"", {xi, beta},
                           worst(inequality_status(a.beta, ">", 0.0), inequality_status(a.xi, ">=", a.beta)),
                           "log sup_omega mu^omega(annulus) / mu(B) against log r and log rho"};
  }));

  report.entries.push_back(guarded("VIII", [&] {
    double k_hat = 1.0;
    for (double x : centers)
      for (double rho : budgets.rho_grid) k_hat = std::max(k_hat, k_ratio_audit(marginal, quenched, x, rho).k_hat());
    FittedExponent f{"K", k_hat, false, "rho", *rho_lo, *rho_hi};
    return AssumptionEntry{"", {f}, std::isfinite(k_hat) ? Status::pass : Status::fail,
                           "max over centers, radii and " + std::to_string(quenched.size()) +
                               " realisations of max(mu / mu^omega, mu^omega / mu)"};
  }));

  report.entries.push_back(guarded("IX", [&] {
    const auto a = annulus_fit(quenched, nullptr, centers, budgets.rho_grid, budgets.annulus_fractions);
    FittedExponent xi{"xi_random", a.xi, false, "rho", *rho_lo, *rho_hi};
    FittedExponent beta{"beta_random", a.beta, false, "rho", *rho_lo, *rho_hi};
    return AssumptionEntry{"", {xi, beta},
                           worst(inequality_status(a.beta, ">", 0.0), inequality_status(a.xi, ">=", a.beta)),
                           "log sup_omega mu^omega(annulus) / mu^omega(B) against log r and log rho"};
  }));

  return report;
}

CaseVerdict theorem_case_check(const AssumptionReport& report) {
  const FittedExponent kappa_f = report.require("kappa");
  const FittedExponent pa = report.require("p_annealed");
  const FittedExponent pq = report.require("p_quenched");
  const double xi = report.require("xi").value;
  const double beta = report.require("beta").value;
  const double d1 = report.require("d1").value;
  const double u0 = report.require("u0").value;
  const double kappa_prime = report.require("kappa_prime").value;

  const double kappa = kappa_f.effective();
  const double p = std::min(pa.effective(), pq.effective());
  const bool delta_super = kappa_f.super_polynomial;
  const bool lambda_super = pa.super_polynomial && pq.super_polynomial;

  CaseVerdict v;
  auto record = [&](const std::string& c, const std::string& what, double lhs, const std::string& rel, double rhs) {
    bool holds = false;
    if (rel == "<") holds = lhs < rhs;
    if (rel == ">") holds = lhs > rhs;
    if (rel == "==") holds = lhs == rhs;
    v.ledger.push_back({c, what, lhs, rel, rhs, holds});
    return holds;
  };
  const double min1u0 = std::min(1.0, u0);
  const double second = (beta / xi + d1) / p;  // 0 when p is infinite

  bool c_ok = record("C", "delta decays super-polynomially", delta_super ? 1.0 : 0.0, "==", 1.0);
  c_ok = record("C", "lambda decays super-polynomially", lambda_super ? 1.0 : 0.0, "==", 1.0) && c_ok;

  bool b_ok = record("B", "delta decays super-polynomially", delta_super ? 1.0 : 0.0, "==", 1.0);
  b_ok = record("B", "p > 1", p, ">", 1.0) && b_ok;
  b_ok = record("B", "(beta/xi + d1)/p < min(1, u0)", second, "<", min1u0) && b_ok;

  bool a_ok = record("A", "kappa > 1", kappa, ">", 1.0);
  a_ok = record("A", "p > 1", p, ">", 1.0) && a_ok;
  a_ok = record("A", "kappa xi > 1", kappa * xi, ">", 1.0) && a_ok;
  const double first = std::isinf(kappa) ? 0.0 : d1 * beta / (kappa * xi - 1.0);
  a_ok = record("A", "max(d1 beta/(kappa xi - 1), (beta/xi + d1)/p) < min(1, u0)", std::max(first, second), "<",
                min1u0) &&
         a_ok;
  a_ok = record("A", "gamma = kappa u0 - 2 - kappa' > 1", kappa * u0 - 2.0 - kappa_prime, ">", 1.0) && a_ok;

  if (c_ok) v.satisfied.push_back("C");
  if (b_ok) v.satisfied.push_back("B");
  if (a_ok) v.satisfied.push_back("A");
  v.verdict = v.satisfied.empty() ? "none" : v.satisfied.front();
  return v;
}

namespace {

using nlohmann::json;

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw ContractViolation("not a number: " + s);
}

}  // namespace

std::string to_json(const AssumptionReport& report, int indent) {
  json j;
  j["system"] = report.system;
  j["assumptions"] = json::array();
  for (const auto& e : report.entries) {
    json je{{"id", e.id}, {"status", to_string(e.status)}, {"evidence", e.evidence}, {"fits", json::array()}};
    for (const auto& f : e.fits)
      je["fits"].push_back({{"name", f.name},
                            {"exponent", number(f.value)},
                            {"super_polynomial", f.super_polynomial},
                            {"range", {{"variable", f.variable}, {"lo", number(f.range_lo)}, {"hi", number(f.range_hi)}}}});
    j["assumptions"].push_back(je);
  }
  return j.dump(indent);
}

AssumptionReport report_from_json(const std::string& text) {
  AssumptionReport r;
  try {
    const json j = json::parse(text);
    r.system = j.at("system").get<std::string>();
    for (const auto& je : j.at("assumptions")) {
      AssumptionEntry e;
      e.id = je.at("id").get<std::string>();
      e.status = status_from_string(je.at("status").get<std::string>());
      e.evidence = je.at("evidence").get<std::string>();
      for (const auto& jf : je.at("fits")) {
        FittedExponent f;
        f.name = jf.at("name").get<std::string>();
        f.value = number_from(jf.at("exponent"));
        f.super_polynomial = jf.at("super_polynomial").get<bool>();
        f.variable = jf.at("range").at("variable").get<std::string>();
        f.range_lo = number_from(jf.at("range").at("lo"));
        f.range_hi = number_from(jf.at("range").at("hi"));
        e.fits.push_back(f);
      }
      r.entries.push_back(std::move(e));
    }
  } catch (const json::exception& err) {
    throw ContractViolation(std::string("malformed audit report: ") + err.what());
  }
  return r;
}

std::string to_json(const CaseVerdict& verdict, int indent) {
  json j{{"verdict", verdict.verdict}, {"satisfied", verdict.satisfied}, {"ledger", json::array()}};
  for (const auto& r : verdict.ledger)
    j["ledger"].push_back({{"case", r.case_id},
                           {"inequality", r.description},
                           {"lhs", number(r.lhs)},
                           {"relation", r.relation},
                           {"rhs", number(r.rhs)},
                           {"holds", r.holds}});
  return j.dump(indent);
}

std::string render_text(const AssumptionReport& report, const CaseVerdict& verdict) {
  std::ostringstream out;
  out << "Assumption audit for {" << report.system << "}\n\n";
  for (const auto& e : report.entries) {
    out << "(" << e.id << ") " << to_string(e.status) << "\n";
    for (const auto& f : e.fits) {
      out << "    " << f.name << " = " << f.value;
      if (f.super_polynomial) out << " (super-polynomial)";
      out << "  [" << f.variable << " in " << f.range_lo << " .. " << f.range_hi << "]\n";
    }
    out << "    " << e.evidence << "\n";
  }
  out << "\nCase check: " << verdict.verdict << "\n";
  for (const auto& r : verdict.ledger)
    out << "  " << r.case_id << ": " << r.description << ": " << r.lhs << " " << r.relation << " " << r.rhs
        << (r.holds ? "  holds" : "  fails") << "\n";
  return out.str();
}

}  // namespace qhit
