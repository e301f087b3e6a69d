#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qhit/driving.hpp"
#include "qhit/interval_maps.hpp"

namespace qhit {

enum class Status { pass, warn, fail };

const char* to_string(Status s) noexcept;
Status status_from_string(const std::string& s);

/// A fitted exponent with the range of the variable it was fit over.
/// Super-polynomial decay is carried as a flag; the case check then treats
/// the exponent as infinite.
struct FittedExponent {
  std::string name;
  double value = 0.0;
  bool super_polynomial = false;
  std::string variable;  // "k", "n", "rho" or "r/rho"
  double range_lo = 0.0;
  double range_hi = 0.0;

  /// value, or +infinity for super-polynomial decay.
  double effective() const noexcept;
  bool operator==(const FittedExponent&) const = default;
};

struct AssumptionEntry {
  std::string id;  // "I" .. "IX"
  std::vector<FittedExponent> fits;
  Status status = Status::fail;
  std::string evidence;

  bool operator==(const AssumptionEntry&) const = default;
};

struct AssumptionReport {
  std::string system;
  std::vector<AssumptionEntry> entries;  // I..IX in order

  const AssumptionEntry& entry(const std::string& id) const;
  /// Looks a fitted quantity up by name across all entries.
  std::optional<FittedExponent> find(const std::string& name) const;
  /// As find, but throws ContractViolation naming the missing quantity.
  FittedExponent require(const std::string& name) const;

  bool operator==(const AssumptionReport&) const = default;
};

/// Roman numerals of the nine assumptions, in report order.
const std::vector<std::string>& assumption_ids();

/// Status of an inequality lhs (relation) rhs. Strict relations ("<", ">")
/// pass with a relative margin of at least `margin`, warn when satisfied with
/// less, and fail otherwise. Non-strict relations ("<=", ">=") pass when
/// satisfied up to a relative tolerance of `margin` and fail otherwise.
Status inequality_status(double lhs, const std::string& relation, double rhs, double margin = 0.1);

struct AuditBudgets {
  std::size_t bins = std::size_t{1} << 12;
  std::size_t n_pull = 200;
  std::size_t ensemble = 32;       // realisations for the ensemble audits
  std::size_t corr_ensemble = 8;   // realisations for the annealed correlations
  std::size_t n_centers = 32;
  std::vector<double> rho_grid{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  std::vector<double> annulus_fractions{0.5, 0.25, 0.125, 0.0625};
  std::vector<std::size_t> k_grid{1, 2, 4, 8, 11, 16, 22, 32, 45, 64, 90, 128};
  std::size_t diameter_n_lo = 20;
  std::size_t diameter_n_hi = 100;
  std::size_t distortion_n_max = 14;
  std::size_t cell_cap = kDefaultCellCap;
  double center_margin = 0.0;  // centers closer than this to 0 are redrawn
  double decay_floor = 1e-13;  // correlations below this are treated as numerical zero
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const AuditBudgets&) const = default;
};

/// Runs the nine sub-audits. Sub-operation errors are rethrown with the
/// assumption id prefixed.
AssumptionReport run_audit(const MapSystem& system, const DrivingConfig& driving, const AuditBudgets& budgets);

struct InequalityRecord {
  std::string case_id;
  std::string description;
  double lhs = 0.0;
  std::string relation;
  double rhs = 0.0;
  bool holds = false;

  bool operator==(const InequalityRecord&) const = default;
};

struct CaseVerdict {
  std::string verdict;  // "C", "B", "A" or "none": first satisfied in that order
  std::vector<std::string> satisfied;
  std::vector<InequalityRecord> ledger;
};

/// Plug-in evaluation of the three sufficient conditions. Needs the fitted
/// quantities kappa, p_annealed, p_quenched, xi, beta, d1, u0, kappa_prime.
CaseVerdict theorem_case_check(const AssumptionReport& report);

std::string to_json(const AssumptionReport& report, int indent = 2);
AssumptionReport report_from_json(const std::string& text);
std::string to_json(const CaseVerdict& verdict, int indent = 2);

/// Human-readable report with one block per assumption and the case ledger.
std::string render_text(const AssumptionReport& report, const CaseVerdict& verdict);

}  // namespace qhit
