#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "shellsolve/boundary.hpp"
#include "shellsolve/continuation.hpp"
#include "shellsolve/grid.hpp"
#include "shellsolve/solvers.hpp"

namespace shellsolve::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step controls tuned for the snap-through preset on G_40.
inline ContinuationConfig snap_defaults() {
  ContinuationConfig c;
  c.ds0 = 0.01;
  c.ds_max = 0.05;
  c.max_steps = 300;
  return c;
}

/// Presets: the five manufactured/application cases plus "snap-through".
struct ExperimentConfig {
  Bounds bounds = kUnitSquare;
  int N = 40;
  std::vector<int> ladder{20, 40, 80};

  std::string preset = "coupled-nonlinear";
  /// Uniform load for `solve` with the snap-through preset.
  double xi = 0.0;

  /// A family name or "all".
  std::string bc_variant = "clamped";
  double nu = 0.3;
  double x_c = 0.5;
  double r_c = 0.1;
  double eps = 0.01;

  SolverConfig solver;
  ContinuationConfig continuation = snap_defaults();

  double order_min = 1.7;
  double order_max = 2.3;

  bool gnuplot = false;

  std::vector<BoundaryCondition> boundary_conditions() const;
};

/// key = value pairs; keys are "section.name". Values of list keys are
/// space separated.
using KeyValues = std::map<std::string, std::string>;

/// Reads a sectioned INI file into dotted keys.
KeyValues read_config_file(const std::string& path);

/// Applies the pairs in order over the defaults. Throws ConfigError naming the
/// key for unknown keys, unparsable values and out-of-range settings.
ExperimentConfig build_config(const KeyValues& kv);

/// All recognised keys, sorted.
std::vector<std::string> known_keys();

}  // namespace shellsolve::app
