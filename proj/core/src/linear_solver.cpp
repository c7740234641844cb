#include "shellsolve/linear_solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace shellsolve {

namespace {

using BaseLU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

// Exposes the diagonal of U, which SparseLU keeps inside the supernodal L store.
class PivotLU : public BaseLU {
 public:
  struct PivotStats {
    double min_abs = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    Eigen::Index min_col = 0;
  };

  PivotStats pivots() const {
    PivotStats st;
    for (Eigen::Index j = 0; j < this->cols(); ++j) {
      double d = 0.0;
      for (SCMatrix::InnerIterator it(this->m_Lstore, j); it; ++it) {
        if (it.index() == j) {
          d = std::abs(it.value());
          break;
        }
      }
      if (d < st.min_abs) {
        st.min_abs = d;
        st.min_col = j;
      }
      st.max_abs = std::max(st.max_abs, d);
    }
    return st;
  }
};

constexpr double kSchurCond = 1e13;

}  // namespace

struct LinearSolver::Impl {
  PivotLU lu;
  Vector row_scale;
  bool ok = false;
  double ratio = 0.0;

  // Border elimination: the leading block A is factored as A + sigma C F^T,
  // with F selecting the pinned columns.
  Eigen::Index m = 0;
  Eigen::Index p = 0;
  std::vector<Eigen::Index> pins;
  double sigma = 1.0;
  SparseMatrix Rt;
  Eigen::MatrixXd D;
  Eigen::MatrixXd X;
  Eigen::FullPivLU<Eigen::MatrixXd> schur;
};

LinearSolver::LinearSolver(double singular_tol, double pivot_threshold)
    : impl_(std::make_unique<Impl>()), singular_tol_(singular_tol), pivot_threshold_(pivot_threshold) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

bool LinearSolver::factor_sparse(const SparseMatrix& A, const ColumnDescriber& describe, bool throw_on_singular) {
  Impl& s = *impl_;
  const Eigen::Index n = A.rows();
  s.lu.setPivotThreshold(pivot_threshold_);
  s.lu.analyzePattern(A);
  s.lu.factorize(A);

  auto fail = [&](Eigen::Index permuted_col, double ratio) {
    const auto col = static_cast<std::size_t>(s.lu.colsPermutation().indices()[permuted_col]);
    std::ostringstream os;
    os << "singular matrix: pivot ratio " << ratio << " at unknown " << col;
    if (describe) {
      os << " (" << describe(col) << ")";
    }
    throw SingularMatrixError(os.str(), col, ratio);
  };

  if (s.lu.info() != Eigen::Success) {
    s.ratio = 0.0;
    if (!throw_on_singular) return false;
    // SparseLU stops at the first exactly-zero pivot and reports it in lastErrorMessage.
    Eigen::Index at = 0;
    std::istringstream is(s.lu.lastErrorMessage());
    std::string word;
    while (is >> word) {
      if (!word.empty() && std::isdigit(static_cast<unsigned char>(word[0]))) {
        at = std::stol(word);
      }
    }
    fail(std::min<Eigen::Index>(at, n - 1), 0.0);
  }
  const auto st = s.lu.pivots();
  s.ratio = st.max_abs > 0.0 ? st.min_abs / st.max_abs : 0.0;
  if (!(s.ratio > singular_tol_)) {
    if (!throw_on_singular) return false;
    fail(st.min_col, s.ratio);
  }
  return true;
}

bool LinearSolver::factor_border(const SparseMatrix& K, Eigen::Index p) {
  Impl& s = *impl_;
  const Eigen::Index n = K.rows();
  const Eigen::Index m = n - p;
  s.m = m;
  s.p = p;

  SparseMatrix A = K.topLeftCorner(m, m);
  const Eigen::MatrixXd C = Eigen::MatrixXd(K.topRightCorner(m, p));
  s.Rt = K.bottomLeftCorner(p, m);
  s.D = Eigen::MatrixXd(K.bottomRightCorner(p, p));

  // Pin the columns where the border rows are most independent.
  const Eigen::MatrixXd Rt_dense = Eigen::MatrixXd(s.Rt);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Rt_dense);
  s.pins.assign(static_cast<std::size_t>(p), 0);
  for (Eigen::Index k = 0; k < p; ++k) {
    s.pins[static_cast<std::size_t>(k)] = qr.colsPermutation().indices()[k];
  }
  const double cmax = C.cwiseAbs().maxCoeff();
  if (cmax == 0.0) return false;
  s.sigma = 1.0 / cmax;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() + p * m));
  for (Eigen::Index c = 0; c < A.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  }
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::Index col = s.pins[static_cast<std::size_t>(k)];
    for (Eigen::Index r = 0; r < m; ++r) {
      if (C(r, k) != 0.0) t.emplace_back(r, col, s.sigma * C(r, k));
    }
  }
  SparseMatrix At(m, m);
  At.setFromTriplets(t.begin(), t.end());
  At.makeCompressed();
  if (!factor_sparse(At, {}, false)) return false;

  s.X = Eigen::MatrixXd(m, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    s.X.col(k) = s.lu.solve(Vector(C.col(k)));
  }
  Eigen::MatrixXd FtX(p, p);
  for (Eigen::Index k = 0; k < p; ++k) FtX.row(k) = s.X.row(s.pins[static_cast<std::size_t>(k)]);
  const Eigen::MatrixXd S = s.Rt * s.X + s.D * (s.sigma * FtX - Eigen::MatrixXd::Identity(p, p));
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  const auto& sv = svd.singularValues();
  if (!(sv[p - 1] > sv[0] / kSchurCond)) return false;
  s.schur.compute(S);
  return true;
}

void LinearSolver::factorize(const SparseMatrix& A, const ColumnDescriber& describe, std::size_t border) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("linear solve needs a square matrix");
  }
  Impl& s = *impl_;
  s.ok = false;
  const Eigen::Index n = A.rows();
  s.row_scale = Vector::Zero(n);
  for (Eigen::Index c = 0; c < A.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) {
      s.row_scale[it.row()] = std::max(s.row_scale[it.row()], std::abs(it.value()));
    }
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    if (s.row_scale[r] == 0.0) {
      std::ostringstream os;
      os << "matrix row " << r << " is empty";
      throw SingularMatrixError(os.str(), static_cast<std::size_t>(r), 0.0);
    }
    s.row_scale[r] = 1.0 / s.row_scale[r];
  }
  SparseMatrix scaled = s.row_scale.asDiagonal() * A;
  scaled.makeCompressed();

  const auto p = static_cast<Eigen::Index>(border);
  s.p = 0;
  if (p > 0 && p < n && factor_border(scaled, p)) {
    s.ok = true;
    return;
  }
  // No border, or the pinned update was singular: factor the whole matrix.
  s.p = 0;
  factor_sparse(scaled, describe, true);
  s.ok = true;
}

Vector LinearSolver::solve(const Vector& b) const {
  const Impl& s = *impl_;
  if (!s.ok) {
    throw std::logic_error("LinearSolver::solve called without a successful factorization");
  }
  const Vector rhs = s.row_scale.cwiseProduct(b);
  if (s.p == 0) {
    return s.lu.solve(rhs);
  }
  const Vector x1 = s.lu.solve(Vector(rhs.head(s.m)));
  Vector Ftx1(s.p);
  for (Eigen::Index k = 0; k < s.p; ++k) Ftx1[k] = x1[s.pins[static_cast<std::size_t>(k)]];
  const Vector r2 = rhs.tail(s.p) - s.Rt * x1 - s.sigma * (s.D * Ftx1);
  const Vector beta = s.schur.solve(r2);
  Vector out(s.m + s.p);
  out.head(s.m) = x1 + s.X * beta;
  Vector Ftx(s.p);
  for (Eigen::Index k = 0; k < s.p; ++k) Ftx[k] = out[s.pins[static_cast<std::size_t>(k)]];
  out.tail(s.p) = s.sigma * Ftx - beta;
  return out;
}

bool LinearSolver::factorized() const { return impl_->ok; }

double LinearSolver::pivot_ratio() const { return impl_->ratio; }

Vector linear_solve(const SparseMatrix& A, const Vector& b, const ColumnDescriber& describe, std::size_t border) {
  LinearSolver solver;
  solver.factorize(A, describe, border);
  return solver.solve(b);
}

}  // namespace shellsolve
