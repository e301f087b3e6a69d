#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "qhit/audit.hpp"
#include "qhit/quenched_law.hpp"
#include "qhit_app/config.hpp"

namespace qhit::app {

enum class LawMode { hitting, returns };

const char* to_string(LawMode mode) noexcept;
/// "hitting" or "return"; anything else is a ConfigError.
LawMode law_mode_from_string(const std::string& s);

struct CenterLaw {
  std::size_t rho_index = 0;
  std::size_t center_index = 0;
  double rho = 0.0;
  double center = 0.0;
  double mu_b = 0.0;  // marginal mass of the ball
  EmpiricalLaw law;
  std::vector<double> product;  // product law at every t-grid point
  KsResult ks;
  KacResult kac;
  double product_gap = 0.0;  // sup over t <= 3 of |F_hat - product law|
};

struct LawRun {
  LawMode mode = LawMode::hitting;
  double density_convergence = 0.0;
  std::vector<CenterLaw> centers;

  /// Largest KS value (distance plus censored fraction) at rho index ri.
  double worst_ks(std::size_t rho_index) const;
};

/// Computes every (rho, center) law of `config` without writing files.
LawRun run_law(const ExperimentConfig& config, LawMode mode, std::ostream* progress = nullptr);

/// Each command writes its CSV and JSON artifacts, the effective config,
/// summary.json and manifest.json to config.out_dir.
void cmd_density(const ExperimentConfig& config, std::ostream* progress = nullptr);
LawRun cmd_law(const ExperimentConfig& config, LawMode mode, std::ostream* progress = nullptr);
void cmd_short_returns(const ExperimentConfig& config, std::ostream* progress = nullptr);
CaseVerdict cmd_audit(const ExperimentConfig& config, std::ostream* progress = nullptr);

}  // namespace qhit::app
