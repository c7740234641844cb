#pragma once

#include <cstddef>
#include <string>

#include "shellsolve/boundary.hpp"
#include "shellsolve/grid.hpp"
#include "shellsolve/linear_solver.hpp"
#include "shellsolve/stencils.hpp"

namespace shellsolve {

enum class Linearity { Linear, Nonlinear };

/// Data of one shell problem. Empty functions are treated as zero.
struct ProblemSpec {
  ScalarField w0;
  ScalarField f_phi;
  ScalarField f_w;
  BoundaryCondition bc = Clamped{};
  Linearity linearity = Linearity::Nonlinear;
};

/// Phi and W over the full grid; `a` holds the three plane multipliers when
/// the W field is bordered, and is empty otherwise.
struct State {
  Vector phi;
  Vector w;
  Vector a;
};

/// n x 3 matrix with columns x, y, 1 over every node (ghosts included).
SparseMatrix plane_basis(const Grid& g);

/// Single-field matrix: the biharmonic on physical nodes, BC rows on ghosts.
SparseMatrix field_matrix(const OperatorSet& ops, const BoundaryCondition& bc, Field field);

/// Indicator of the rows that carry the PDE (physical nodes).
Vector pde_mask(const Grid& g);

/// [[A, Q], [Q^T, 0]].
SparseMatrix border_with_planes(const SparseMatrix& A, const SparseMatrix& Q);

struct AugmentedSolution {
  Vector w;
  Vector a;
};

/// Solves [[A, Q], [Q^T, 0]] [W; a] = [b; 0] with Q = plane_basis(g).
AugmentedSolution regularize_free(const SparseMatrix& A, const Vector& b, const Grid& g);

/// Assembled coupled system over the unknowns z = [Phi; W] (plus a when
/// bordered). Immutable apart from the phi forcing, which continuation varies.
class DiscreteSystem {
 public:
  DiscreteSystem(const ProblemSpec& spec, const Grid& g);

  const Grid& grid() const { return ops_.grid; }
  const OperatorSet& ops() const { return ops_; }
  const BoundaryCondition& bc() const { return bc_; }
  Linearity linearity() const { return linearity_; }

  const SparseMatrix& B_phi() const { return B_phi_; }
  const SparseMatrix& B_w() const { return B_w_; }
  const Vector& mask() const { return mask_; }
  const Vector& W0() const { return W0_; }
  const Vector& Fphi() const { return Fphi_; }
  const Vector& Fw() const { return Fw_; }
  void set_Fphi(Vector f);

  bool bordered() const { return bordered_; }
  /// Number of trailing multiplier unknowns (3 when bordered, else 0).
  std::size_t border() const { return bordered_ ? 3 : 0; }
  const SparseMatrix& Q() const { return Q_; }

  std::size_t field_size() const { return n_; }
  std::size_t size() const { return 2 * n_ + (bordered_ ? 3 : 0); }

  Vector pack(const State& s) const;
  State unpack(const Vector& z) const;

  Vector residual(const Vector& z) const;
  SparseMatrix jacobian(const Vector& z) const;
  /// ||dPhi||_inf + ||dW||_inf; multipliers are not part of the measure.
  double increment_norm(const Vector& dz) const;
  /// ||dX||_inf with X = [Phi; W]; the quantity the rate estimate is built on.
  double state_change(const Vector& dz) const;
  /// dF/d(uniform phi forcing): the PDE mask on the Phi rows.
  Vector phi_load_direction() const;

  /// W0 for W, and Phi solving the Phi equation at W = W0 with the Phi BCs.
  State initial_guess() const;

  /// "Phi row (3, 0) [boundary]" style label for unknown or equation k.
  std::string describe(std::size_t k) const;

  /// Right-hand sides of the two Picard sub-solves.
  Vector picard_phi_rhs(const Vector& w) const;
  Vector picard_w_rhs(const Vector& phi, const Vector& w, double delta) const;
  /// W-matrix of the Picard sub-solve, B_w - delta P M_Lh(phi), bordered if needed.
  SparseMatrix picard_w_matrix(const Vector& phi, double delta) const;

 private:
  OperatorSet ops_;
  BoundaryCondition bc_;
  Linearity linearity_;
  std::size_t n_;
  SparseMatrix B_phi_;
  SparseMatrix B_w_;
  Vector mask_;
  Vector W0_;
  Vector Fphi_;
  Vector Fw_;
  bool bordered_;
  SparseMatrix Q_;
  SparseMatrix MLh_W0_;
};

}  // namespace shellsolve
