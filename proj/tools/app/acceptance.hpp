#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shellsolve::app {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  /// One line per sub-check that failed, plus summary figures.
  std::vector<std::string> details;
  double seconds = 0.0;
};

struct SuiteOptions {
  int jobs = 1;
  /// Grid of the iteration-rate comparison.
  int rate_N = 160;
  /// Progress lines; may be null.
  std::ostream* log = nullptr;
};

std::vector<int> criterion_ids();
CriterionResult run_criterion(int id, const SuiteOptions& opt);

/// "PASS [3] title (12.3 s)" followed by indented detail lines.
std::string format_result(const CriterionResult& r);

}  // namespace shellsolve::app
