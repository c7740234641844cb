// Acceptance gate: one PASS/FAIL line per criterion.
#include <CLI11.hpp>
#include <iostream>

#include "app/acceptance.hpp"

using namespace shellsolve::app;

int main(int argc, char** argv) {
  CLI::App app{"shellsolve acceptance checks"};
  std::vector<int> only;
  SuiteOptions opt;
  bool verbose = false;
  app.add_option("--criterion", only, "Run only these criteria");
  app.add_option("--jobs", opt.jobs)->check(CLI::PositiveNumber);
  app.add_option("--rate-N", opt.rate_N, "Grid of the iteration-rate check");
  app.add_flag("-v,--verbose", verbose, "Print progress lines");
  CLI11_PARSE(app, argc, argv);
  if (verbose) opt.log = &std::cerr;

  const std::vector<int> ids = only.empty() ? criterion_ids() : only;
  int failed = 0;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, opt);
    std::cout << format_result(r) << std::flush;
    if (!r.pass) ++failed;
  }
  std::cout << (ids.size() - failed) << "/" << ids.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
