#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qhit::app {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string target;
  std::string observed;
  bool pass = false;
  double seconds = 0.0;
};

struct AcceptOptions {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  /// Scratch space for the determinism criterion's two law runs.
  std::filesystem::path scratch = "accept_scratch";
  /// Criterion ids to run; empty runs all ten.
  std::vector<int> only;
};

/// Runs the acceptance criteria. A criterion that throws is recorded as a
/// failure with the error message as its observation.
std::vector<CriterionResult> run_acceptance(const AcceptOptions& options, std::ostream* progress = nullptr);

/// Table of criterion, target, observed and verdict; one line per criterion.
std::string render_acceptance(const std::vector<CriterionResult>& results);

}  // namespace qhit::app
