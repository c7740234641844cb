#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "shellsolve/grid.hpp"
#include "shellsolve/stencils.hpp"

namespace shellsolve {

/// w = w_nn = 0, phi = phi_nn = 0.
struct Supported {};
/// w = w_n = 0, phi = phi_n = 0.
struct Clamped {};
/// Free edges for w (with the corner condition w_xy = 0); phi is clamped.
struct Free {
  double nu = 0.3;
};
/// Clamped window on top/bottom blended into supported edges.
struct ClampedSupported {
  double x_c = 0.5;
  double r_c = 0.1;
  double eps = 0.01;
};
/// Clamped window on top/bottom blended into free edges; phi is clamped.
struct ClampedFree {
  double x_c = 0.5;
  double r_c = 0.1;
  double eps = 0.01;
  double nu = 0.3;
};

using BoundaryCondition = std::variant<Supported, Clamped, Free, ClampedSupported, ClampedFree>;

enum class Field { Phi, W };

std::string bc_name(const BoundaryCondition& bc);
/// Parses "supported", "clamped", "free", "cs", "cf" with default parameters.
BoundaryCondition bc_from_name(const std::string& name);
/// The five families with default parameters, in the order
/// supported, clamped, free, cs, cf.
std::vector<BoundaryCondition> all_boundary_conditions();

/// Throws std::invalid_argument when parameters are out of range for the grid.
void validate(const BoundaryCondition& bc, const Grid& g);

/// True when the W field has free edges everywhere, i.e. its operator
/// annihilates planes and needs the [A Q; Q^T 0] regularization.
bool has_plane_null_space(const BoundaryCondition& bc, Field field);

/// omega(x) = 1 - (tanh((|x - x_c| - r_c)/eps) + 1)/2.
double transition_omega(double x, double x_c, double r_c, double eps);

/// D_a = a1 Dx + a2 Dy with centred first differences, placed at a node.
SparseRow directional_first(const Grid& g, std::array<double, 2> a, NodeIndex node);

/// The two boundary conditions of one field on one side at one boundary node,
/// as stencils relative to that node.
struct SideConditions {
  Stencil first;   // lower-derivative condition
  Stencil second;  // higher-derivative condition
  bool first_is_dirichlet = false;
};

SideConditions side_conditions(const Grid& g, const BoundaryCondition& bc, Field field, Side side,
                               NodeIndex node);

struct BcEquation {
  SparseRow row;
  double rhs = 0.0;
  /// Ghost node whose row this equation occupies.
  NodeIndex target;
};

/// One equation per ghost node (side and corner ghosts) for the given field.
/// Physical nodes, boundary included, carry the field's PDE row.
///
/// Side ghost rows: layer 1 takes the side's first condition, layer 2 the
/// second. At a corner where both sides impose a Dirichlet first condition the
/// x-side keeps it, the y-side first ghost takes its second condition and the
/// y-side second ghost gets cubic extrapolation along the normal. Corner ghosts
/// get cubic extrapolation along the diagonal, except the diagonal neighbour of
/// a free corner of W, which carries w_xy = 0 at the corner node.
std::vector<BcEquation> bc_equations(const Grid& g, const BoundaryCondition& bc, Field field);

}  // namespace shellsolve
