#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shellsolve/boundary.hpp"
#include "shellsolve/jet.hpp"
#include "shellsolve/solvers.hpp"
#include "shellsolve/system.hpp"

namespace shellsolve {

enum class CaseName { BiharmTrig, BiharmPoly, CoupledLinear, CoupledNonlinear, LocalizedThermal };

/// "biharm-trig", "biharm-poly", "coupled-linear", "coupled-nonlinear", "localized-thermal".
std::string case_name(CaseName c);
CaseName case_from_name(const std::string& name);

/// A test problem. Cases with exact solutions carry them as jet fields so the
/// forcing follows by exact differentiation; the localized thermal case
/// carries its forcing directly.
struct ManufacturedCase {
  CaseName name = CaseName::BiharmTrig;
  Bounds bounds = kUnitSquare;
  Linearity linearity = Linearity::Linear;
  /// Only the W equation, nabla^4 w = f_w, is solved.
  bool biharmonic_only = false;
  JetField phi_e;
  JetField w_e;
  JetField w0;
  ScalarField f_phi_given;
  ScalarField f_w_given;

  bool has_exact() const { return static_cast<bool>(w_e); }
};

ManufacturedCase make_case(CaseName name, Bounds bounds = kUnitSquare);

/// Value-only view of a jet field.
ScalarField to_scalar(const JetField& f);

struct Forcing {
  ScalarField f_phi;
  ScalarField f_w;
};

/// f_phi = -nabla^4 phi_e - L[w_e, w_e]/2 - L[w0, w_e],
/// f_w = nabla^4 w_e - L[w_e, phi_e] - L[w0, phi_e]; the linear variant drops
/// the terms without w0. Cases without exact solutions return their given data.
Forcing synthesize_forcing(const ManufacturedCase& c);

ProblemSpec problem_spec(const ManufacturedCase& c, const BoundaryCondition& bc);

struct ErrorNorms {
  double linf = 0.0;
  double l2 = 0.0;
};

/// Norms of exact - numeric over physical nodes (boundary included);
/// L2 = sqrt(hx hy sum E^2).
ErrorNorms error_norms(const Vector& numeric, const Vector& exact, const Grid& g);
ErrorNorms error_norms(const Vector& numeric, const ScalarField& exact, const Grid& g);

/// u - Q (Q^T Q)^{-1} Q^T u with Q = plane_basis(g).
Vector remove_plane_component(const Vector& u, const Grid& g);

struct CaseSolution {
  Grid grid;
  State state;
  SolveReport report;
  ErrorNorms err_phi;
  ErrorNorms err_w;
};

/// Solves one case on G_N. Biharmonic cases use a single direct solve
/// (report method "direct"); free-edge W errors are measured after removing
/// the plane component of the exact solution.
CaseSolution solve_case(const ManufacturedCase& c, const BoundaryCondition& bc, int N, const SolverConfig& cfg);

struct RefinementRow {
  int N = 0;
  double h = 0.0;
  double err_phi = 0.0;
  double err_w = 0.0;
  std::optional<double> order_phi;
  std::optional<double> order_w;
  std::string solver;
  std::string bc;
  int steps = 0;
  bool converged = false;
  std::string message;
};

struct RefinementTable {
  std::vector<RefinementRow> rows;
};

/// Observed order between grids with errors e1, e2 at spacings h1 > h2;
/// empty when either error sits at the roundoff floor.
std::optional<double> observed_order(double e1, double e2, double h1, double h2);

/// One row per N (solved concurrently on up to `jobs` threads); failures are
/// recorded in the row rather than thrown.
RefinementTable refinement_study(const ManufacturedCase& c, const BoundaryCondition& bc, const SolverConfig& cfg,
                                 const std::vector<int>& Ns, int jobs = 1);

}  // namespace shellsolve
