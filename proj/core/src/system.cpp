#include "shellsolve/system.hpp"

#include <sstream>
#include <stdexcept>

namespace shellsolve {

namespace {

Vector sample_or_zero(const ScalarField& f, const Grid& g) {
  if (!f) {
    return Vector::Zero(static_cast<Eigen::Index>(g.size()));
  }
  return sample(f, g).values;
}

void append_block(std::vector<Triplet>& out, const SparseMatrix& m, Eigen::Index row0, Eigen::Index col0) {
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      out.emplace_back(row0 + it.row(), col0 + it.col(), it.value());
    }
  }
}

}  // namespace

SparseMatrix plane_basis(const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Triplet> t;
  t.reserve(3 * g.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const NodeIndex node = g.unflatten(static_cast<std::size_t>(k));
    t.emplace_back(k, 0, g.x(node.i));
    t.emplace_back(k, 1, g.y(node.j));
    t.emplace_back(k, 2, 1.0);
  }
  SparseMatrix Q(n, 3);
  Q.setFromTriplets(t.begin(), t.end());
  return Q;
}

Vector pde_mask(const Grid& g) {
  Vector m(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const NodeIndex node = g.unflatten(k);
    m[static_cast<Eigen::Index>(k)] = g.is_physical(node.i, node.j) ? 1.0 : 0.0;
  }
  return m;
}

SparseMatrix field_matrix(const OperatorSet& ops, const BoundaryCondition& bc, Field field) {
  const Grid& g = ops.grid;
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(ops.Mbih.nonZeros()) + 16 * g.size() / 4);
  append_block(t, ops.Mbih, 0, 0);
  for (const BcEquation& eq : bc_equations(g, bc, field)) {
    const auto row = static_cast<Eigen::Index>(g.flat(eq.target));
    for (const auto& [col, w] : eq.row) {
      t.emplace_back(row, static_cast<Eigen::Index>(col), w);
    }
  }
  SparseMatrix B(n, n);
  B.setFromTriplets(t.begin(), t.end());
  B.makeCompressed();
  return B;
}

SparseMatrix border_with_planes(const SparseMatrix& A, const SparseMatrix& Q) {
  const Eigen::Index n = A.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * Q.nonZeros()));
  append_block(t, A, 0, 0);
  append_block(t, Q, 0, n);
  append_block(t, SparseMatrix(Q.transpose()), n, 0);
  SparseMatrix out(n + Q.cols(), n + Q.cols());
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

AugmentedSolution regularize_free(const SparseMatrix& A, const Vector& b, const Grid& g) {
  const SparseMatrix Q = plane_basis(g);
  if (A.rows() != Q.rows() || b.size() != A.rows()) {
    throw std::invalid_argument("regularize_free: matrix, rhs and grid sizes disagree");
  }
  Vector rhs = Vector::Zero(A.rows() + 3);
  rhs.head(A.rows()) = b;
  const Vector z = linear_solve(border_with_planes(A, Q), rhs, {}, 3);
  return {z.head(A.rows()), z.tail(3)};
}

DiscreteSystem::DiscreteSystem(const ProblemSpec& spec, const Grid& g)
    : ops_(build_operator_set(g)),
      bc_(spec.bc),
      linearity_(spec.linearity),
      n_(g.size()),
      bordered_(has_plane_null_space(spec.bc, Field::W)) {
  validate(bc_, g);
  B_phi_ = field_matrix(ops_, bc_, Field::Phi);
  B_w_ = field_matrix(ops_, bc_, Field::W);
  mask_ = pde_mask(g);
  W0_ = sample_or_zero(spec.w0, g);
  Fphi_ = sample_or_zero(spec.f_phi, g);
  Fw_ = sample_or_zero(spec.f_w, g);
  MLh_W0_ = build_MLh(W0_, ops_);
  if (bordered_) {
    Q_ = plane_basis(g);
  }
}

void DiscreteSystem::set_Fphi(Vector f) {
  if (static_cast<std::size_t>(f.size()) != n_) {
    throw std::invalid_argument("phi forcing has the wrong length");
  }
  Fphi_ = std::move(f);
}

Vector DiscreteSystem::pack(const State& s) const {
  Vector z(static_cast<Eigen::Index>(size()));
  const auto n = static_cast<Eigen::Index>(n_);
  z.segment(0, n) = s.phi;
  z.segment(n, n) = s.w;
  if (bordered_) {
    z.tail(3) = s.a.size() == 3 ? s.a : Vector::Zero(3);
  }
  return z;
}

State DiscreteSystem::unpack(const Vector& z) const {
  if (static_cast<std::size_t>(z.size()) != size()) {
    throw std::invalid_argument("state vector has the wrong length");
  }
  const auto n = static_cast<Eigen::Index>(n_);
  State s;
  s.phi = z.segment(0, n);
  s.w = z.segment(n, n);
  if (bordered_) {
    s.a = z.tail(3);
  }
  return s;
}

Vector DiscreteSystem::residual(const Vector& z) const {
  const State s = unpack(z);
  const bool nonlinear = linearity_ == Linearity::Nonlinear;
  const auto n = static_cast<Eigen::Index>(n_);

  Vector phi_src = MLh_W0_ * s.w + Fphi_;
  Vector w_src = MLh_W0_ * s.phi + Fw_;
  if (nonlinear) {
    phi_src += 0.5 * apply_Lh(ops_, s.w, s.w);
    w_src += apply_Lh(ops_, s.w, s.phi);
  }

  Vector F(static_cast<Eigen::Index>(size()));
  F.segment(0, n) = B_phi_ * s.phi + mask_.cwiseProduct(phi_src);
  F.segment(n, n) = B_w_ * s.w - mask_.cwiseProduct(w_src);
  if (bordered_) {
    F.segment(n, n) += Q_ * s.a;
    F.tail(3) = Q_.transpose() * s.w;
  }
  return F;
}

SparseMatrix DiscreteSystem::jacobian(const Vector& z) const {
  const State s = unpack(z);
  const bool nonlinear = linearity_ == Linearity::Nonlinear;
  const auto n = static_cast<Eigen::Index>(n_);

  SparseMatrix coupling = nonlinear ? SparseMatrix(build_MLh(s.w, ops_) + MLh_W0_) : MLh_W0_;
  coupling = mask_.asDiagonal() * coupling;
  SparseMatrix ww = B_w_;
  if (nonlinear) {
    ww -= SparseMatrix(mask_.asDiagonal() * build_MLh(s.phi, ops_));
  }

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(B_phi_.nonZeros() + ww.nonZeros() + 2 * coupling.nonZeros() +
                                     (bordered_ ? 2 * Q_.nonZeros() : 0)));
  append_block(t, B_phi_, 0, 0);
  append_block(t, coupling, 0, n);
  append_block(t, SparseMatrix(-coupling), n, 0);
  append_block(t, ww, n, n);
  if (bordered_) {
    append_block(t, Q_, n, 2 * n);
    append_block(t, SparseMatrix(Q_.transpose()), 2 * n, n);
  }
  const auto m = static_cast<Eigen::Index>(size());
  SparseMatrix J(m, m);
  J.setFromTriplets(t.begin(), t.end());
  J.makeCompressed();
  return J;
}

double DiscreteSystem::increment_norm(const Vector& dz) const {
  const auto n = static_cast<Eigen::Index>(n_);
  return dz.segment(0, n).lpNorm<Eigen::Infinity>() + dz.segment(n, n).lpNorm<Eigen::Infinity>();
}

double DiscreteSystem::state_change(const Vector& dz) const {
  return dz.head(static_cast<Eigen::Index>(2 * n_)).lpNorm<Eigen::Infinity>();
}

Vector DiscreteSystem::phi_load_direction() const {
  Vector d = Vector::Zero(static_cast<Eigen::Index>(size()));
  d.head(static_cast<Eigen::Index>(n_)) = mask_;
  return d;
}

Vector DiscreteSystem::picard_phi_rhs(const Vector& w) const {
  Vector src = MLh_W0_ * w + Fphi_;
  if (linearity_ == Linearity::Nonlinear) {
    src += 0.5 * apply_Lh(ops_, w, w);
  }
  return -mask_.cwiseProduct(src);
}

Vector DiscreteSystem::picard_w_rhs(const Vector& phi, const Vector& w, double delta) const {
  Vector src = MLh_W0_ * phi + Fw_;
  if (linearity_ == Linearity::Nonlinear && delta < 1.0) {
    src += (1.0 - delta) * apply_Lh(ops_, w, phi);
  }
  src = mask_.cwiseProduct(src);
  if (!bordered_) {
    return src;
  }
  Vector out = Vector::Zero(src.size() + 3);
  out.head(src.size()) = src;
  return out;
}

SparseMatrix DiscreteSystem::picard_w_matrix(const Vector& phi, double delta) const {
  SparseMatrix A = B_w_;
  if (linearity_ == Linearity::Nonlinear && delta > 0.0) {
    const SparseMatrix PM = mask_.asDiagonal() * build_MLh(phi, ops_);
    A -= delta * PM;
  }
  return bordered_ ? border_with_planes(A, Q_) : A;
}

State DiscreteSystem::initial_guess() const {
  State s;
  s.w = W0_;
  s.phi = linear_solve(B_phi_, picard_phi_rhs(W0_), [this](std::size_t k) { return describe(k); });
  if (bordered_) {
    s.a = Vector::Zero(3);
  }
  return s;
}

std::string DiscreteSystem::describe(std::size_t k) const {
  std::ostringstream os;
  if (k >= 2 * n_) {
    os << "plane multiplier " << (k - 2 * n_);
    return os.str();
  }
  const bool is_phi = k < n_;
  const NodeIndex node = grid().unflatten(is_phi ? k : k - n_);
  const NodeClass c = classify_node(grid(), node.i, node.j);
  os << (is_phi ? "Phi" : "W") << " at " << to_string(node) << " [" << to_string(c.kind) << "]";
  return os.str();
}

}  // namespace shellsolve
