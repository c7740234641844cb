#pragma once

#include <iosfwd>
#include <string>

#include "app/config.hpp"

namespace shellsolve::app {

enum ExitCode : int {
  kOk = 0,
  /// Run finished but a checked quantity (order band, acceptance criterion) failed.
  kCheckFailed = 1,
  kConfigError = 2,
  kNonConvergence = 3,
  kPartialPath = 4,
};

struct RunContext {
  std::string out_dir = ".";
  int jobs = 1;
  std::ostream* log = nullptr;
};

int cmd_refine(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_solve(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_continue(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_paper_suite(const ExperimentConfig& cfg, const RunContext& ctx);

}  // namespace shellsolve::app
