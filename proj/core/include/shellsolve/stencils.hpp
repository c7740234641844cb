#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "shellsolve/grid.hpp"

namespace shellsolve {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Raised when an equation row cannot be built on the grid (stencil leaves the
/// ghost-augmented index range, or equation counts do not close).
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse row over flat node indices.
using SparseRow = std::vector<std::pair<std::size_t, double>>;

/// Finite-difference stencil: offset (di, dj) -> weight, relative to the node
/// it is applied at. Stencils compose, so D_n(D_n^2 + c D_t^2) is written as a
/// product of the one-dimensional pieces.
class Stencil {
 public:
  using Offset = std::pair<int, int>;

  Stencil() = default;

  static Stencil identity();
  /// Single weight at offset (di, dj).
  static Stencil point(int di, int dj, double w = 1.0);
  static Stencil dx(const Grid& g);
  static Stencil dy(const Grid& g);
  static Stencil dxx(const Grid& g);
  static Stencil dyy(const Grid& g);
  static Stencil dxy(const Grid& g);

  Stencil& add(const Stencil& other, double scale = 1.0);
  Stencil& scale(double s);
  /// Returns (*this) o inner: apply inner first, then this.
  Stencil compose(const Stencil& inner) const;

  const std::map<Offset, double>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  bool fits(const Grid& g, NodeIndex at) const;
  double apply(const GridFunction& u, NodeIndex at) const;

  friend Stencil operator+(Stencil a, const Stencil& b) { return a.add(b); }
  friend Stencil operator-(Stencil a, const Stencil& b) { return a.add(b, -1.0); }
  friend Stencil operator*(double s, Stencil a) { return a.scale(s); }

 private:
  std::map<Offset, double> terms_;
};

/// Places a stencil at a node; throws AssemblyError naming the node when the
/// stencil reaches outside the ghost-augmented grid.
SparseRow materialize(const Stencil& s, const Grid& g, NodeIndex at);

enum class DiffOp { Dxx, Dyy, Dxy, Biharmonic };

/// Nodes where the centred operator has its full stencil inside the grid.
bool is_supported(const Grid& g, DiffOp op, int i, int j);
std::vector<bool> support_mask(const Grid& g, DiffOp op);

// Matrix-free applications. Unsupported nodes come back as 0; consult
// support_mask for which entries are meaningful.
GridFunction apply_dxx(const GridFunction& u);
GridFunction apply_dyy(const GridFunction& u);
GridFunction apply_dxy(const GridFunction& u);
GridFunction apply_biharmonic(const GridFunction& u);
/// L_h[U,V] = Dxx U Dyy V + Dyy U Dxx V - 2 Dxy U Dxy V, pointwise.
GridFunction apply_Lh(const GridFunction& u, const GridFunction& v);

/// Sparse difference matrices over the full ghost-inclusive index set.
/// Rows whose stencil would leave the grid are identically zero.
struct OperatorSet {
  Grid grid;
  SparseMatrix Mxx;
  SparseMatrix Myy;
  SparseMatrix Mxy;
  SparseMatrix Mbih;
};

OperatorSet build_operator_set(const Grid& g);

/// M_Lh(U) = diag(Mxx U) Myy + diag(Myy U) Mxx - 2 diag(Mxy U) Mxy,
/// so that M_Lh(U) V = L_h[U, V].
SparseMatrix build_MLh(const Vector& u, const OperatorSet& ops);

/// L_h[U, V] through the operator matrices.
Vector apply_Lh(const OperatorSet& ops, const Vector& u, const Vector& v);

/// Matrix Market coordinate dump (1-based indices).
void write_matrix_market(std::ostream& os, const SparseMatrix& m);

}  // namespace shellsolve
