#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "app/commands.hpp"
#include "app/config.hpp"

using namespace shellsolve::app;

namespace {

// Collects "--section.key=value" and "--section.key value" pairs left over by CLI11.
KeyValues parse_overrides(const std::vector<std::string>& extras) {
  KeyValues kv;
  for (std::size_t k = 0; k < extras.size(); ++k) {
    const std::string& a = extras[k];
    if (a.rfind("--", 0) != 0 || a.find('.') == std::string::npos) {
      throw ConfigError("unexpected argument '" + a + "'");
    }
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      kv[a.substr(2, eq - 2)] = a.substr(eq + 1);
    } else if (k + 1 < extras.size()) {
      kv[a.substr(2)] = extras[++k];
    } else {
      throw ConfigError("override '" + a + "' has no value");
    }
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference shallow-shell solver: refinement studies, single solves and continuation."};
  app.require_subcommand(0, 1);
  app.allow_extras();
  std::string config_path;
  std::string out_dir = std::getenv("SHELLSOLVE_OUT") ? std::getenv("SHELLSOLVE_OUT") : ".";
  int jobs = 1;
  bool list_keys = false;
  app.add_option("--config", config_path, "Sectioned key = value file");
  app.add_option("--out", out_dir, "Output directory (default $SHELLSOLVE_OUT or .)");
  app.add_option("--jobs", jobs, "Independent solves run concurrently")->check(CLI::PositiveNumber);
  app.add_flag("--list-keys", list_keys, "Print the recognised config keys and exit");

  const std::map<std::string, int (*)(const ExperimentConfig&, const RunContext&)> commands{
      {"refine", cmd_refine}, {"solve", cmd_solve}, {"continue", cmd_continue}, {"paper-suite", cmd_paper_suite}};
  const std::map<std::string, std::string> help{
      {"refine", "Mesh refinement study over domain.ladder"},
      {"solve", "Single solve at domain.N; writes field and report CSVs"},
      {"continue", "Pseudo-arclength continuation of the snap-through preset"},
      {"paper-suite", "Runs every acceptance check and writes paper_suite.csv"}};
  for (const auto& [name, _] : commands) {
    app.add_subcommand(name, help.at(name))->fallthrough()->allow_extras();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }
  if (list_keys) {
    for (const auto& k : known_keys()) std::cout << k << '\n';
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << "a subcommand is required (refine, solve, continue, paper-suite)\n";
    return kConfigError;
  }

  ExperimentConfig cfg;
  try {
    KeyValues kv = config_path.empty() ? KeyValues{} : read_config_file(config_path);
    std::vector<std::string> extras = app.remaining();
    for (const auto* sub : app.get_subcommands()) {
      for (const auto& e : sub->remaining()) extras.push_back(e);
    }
    for (auto& [k, v] : parse_overrides(extras)) kv[k] = v;
    cfg = build_config(kv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  RunContext ctx;
  ctx.out_dir = out_dir;
  ctx.jobs = jobs;
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return commands.at(name)(cfg, ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << name << " failed: " << e.what() << '\n';
    return kNonConvergence;
  }
}
