#pragma once

// Synthetic acceptance suite, shared by the acceptance test binary and the
// `repro-synthetic` subcommand.

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace submarket {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Criteria to run; empty runs all of them.
  std::vector<int> only;
  /// Called after each criterion finishes, e.g. to stream the report.
  std::ostream* progress = nullptr;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// One line per criterion: `[PASS] 2 planted-assortative-recovery (12.3 s): detail`.
std::string format_line(const CriterionResult& r);
nlohmann::json acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace submarket
