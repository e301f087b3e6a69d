#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhit/audit.hpp"
#include "qhit/driving.hpp"
#include "qhit/interval_maps.hpp"
#include "qhit/quenched_law.hpp"

namespace qhit::app {

/// Invalid or unreadable configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { expanding, pm };

struct SystemSpec {
  Family family = Family::expanding;
  std::vector<unsigned> slopes{2, 3};
  double alpha0 = 0.1;
  double alpha1 = 0.3;
  PmCoefficient coefficient = PmCoefficient::standard;

  bool operator==(const SystemSpec&) const = default;
};

struct GridSpec {
  std::size_t bins = 4096;
  std::size_t n_pull = 50;
  std::size_t n_omega = 8;
  std::vector<std::int64_t> fibers{0, 1, 2};

  bool operator==(const GridSpec&) const = default;
};

struct LawSpec {
  std::vector<double> rho{0.0009765625};
  double t_min = 0.1;
  double t_max = 5.0;
  std::size_t t_count = 50;
  std::size_t n_samples = 5000;
  double max_iter_factor = 4.0;
  std::size_t n_centers = 3;
  std::vector<double> centers;  // explicit centers; empty means draw from the quenched density
  double center_margin = 0.0;
  std::size_t kac_samples = 5000;

  std::vector<double> t_grid() const;
  bool operator==(const LawSpec&) const = default;
};

struct ShortReturnSpec {
  double a = 0.5;  // 0 selects 1 / (4 log A)
  double b = 0.25;
  std::vector<double> rho{1e-2, 1e-3, 1e-4};
  std::size_t n_centers = 2000;
  std::size_t n_max = 8;

  bool operator==(const ShortReturnSpec&) const = default;
};

struct ExperimentConfig {
  SystemSpec system;
  DrivingConfig driving;
  GridSpec grid;
  LawSpec law;
  ShortReturnSpec short_returns;
  AuditBudgets audit;
  std::string out_dir = "out";
  std::size_t threads = 1;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
  /// Warnings that do not stop a run (PM exponent beyond 1/3).
  std::vector<std::string> warnings() const;

  MapSystem make_system() const;

  bool operator==(const ExperimentConfig& o) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

}  // namespace qhit::app
