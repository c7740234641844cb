#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "shellsolve/grid.hpp"
#include "shellsolve/stencils.hpp"

namespace shellsolve {

/// Raised when a factorization hits a zero or negligible pivot. `column` is the
/// unknown (original ordering) whose pivot failed.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, std::size_t column, double pivot_ratio)
      : std::runtime_error(what), column_(column), pivot_ratio_(pivot_ratio) {}

  std::size_t column() const { return column_; }
  double pivot_ratio() const { return pivot_ratio_; }

 private:
  std::size_t column_;
  double pivot_ratio_;
};

/// Optional hook that turns an unknown index into a readable label for error
/// messages (e.g. "W at (0, 3), boundary").
using ColumnDescriber = std::function<std::string(std::size_t)>;

/// Sparse LU with row equilibration. A factorization whose smallest pivot is
/// below `singular_tol` times the largest is treated as singular. The diagonal
/// is kept as pivot when it is at least `pivot_threshold` times the column
/// maximum, which limits fill from the dense plane-constraint rows.
class LinearSolver {
 public:
  explicit LinearSolver(double singular_tol = 1e-13, double pivot_threshold = 0.01);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// With `border` = p > 0 the trailing p rows and columns are a border
  /// [A C; R^T D] around a leading block A that may be singular (e.g. plane
  /// multipliers or an arclength row). The border is eliminated through a
  /// p x p Schur complement, which avoids the fill its dense rows cause.
  void factorize(const SparseMatrix& A, const ColumnDescriber& describe = {}, std::size_t border = 0);
  Vector solve(const Vector& b) const;

  bool factorized() const;
  /// min |U_jj| / max |U_jj| of the last factorization.
  double pivot_ratio() const;

 private:
  bool factor_sparse(const SparseMatrix& A, const ColumnDescriber& describe, bool throw_on_singular);
  bool factor_border(const SparseMatrix& K, Eigen::Index p);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  double singular_tol_;
  double pivot_threshold_;
};

Vector linear_solve(const SparseMatrix& A, const Vector& b, const ColumnDescriber& describe = {},
                    std::size_t border = 0);

}  // namespace shellsolve
