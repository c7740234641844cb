#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "shellsolve/continuation.hpp"
#include "shellsolve/mms.hpp"
#include "shellsolve/system.hpp"

using namespace shellsolve;

namespace {

Vector random_vector(Eigen::Index n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  Vector v(n);
  for (auto& x : v) x = U(rng);
  return v;
}

double sparse_max_abs(const SparseMatrix& m) {
  double r = 0.0;
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

ProblemSpec smooth_spec(const BoundaryCondition& bc, Linearity lin) {
  ProblemSpec s;
  s.w0 = [](double x, double y) { return 0.2 * std::sin(3 * x) * std::cos(2 * y); };
  s.f_phi = [](double x, double y) { return 5.0 * x * y; };
  s.f_w = [](double x, double y) { return 3.0 + x - y; };
  s.bc = bc;
  s.linearity = lin;
  return s;
}

}  // namespace

TEST(Assemble, LinearWithoutPrecastDecouples) {
  ProblemSpec s = smooth_spec(Clamped{}, Linearity::Linear);
  s.w0 = nullptr;
  const DiscreteSystem sys(s, build_grid(kUnitSquare, 10));
  const auto n = static_cast<Eigen::Index>(sys.field_size());
  const SparseMatrix J = sys.jacobian(Vector::Zero(static_cast<Eigen::Index>(sys.size())));
  EXPECT_EQ(sparse_max_abs(J.block(0, n, n, n)), 0.0);
  EXPECT_EQ(sparse_max_abs(J.block(n, 0, n, n)), 0.0);
  EXPECT_EQ(sparse_max_abs(SparseMatrix(J.block(0, 0, n, n)) - sys.B_phi()), 0.0);
  EXPECT_EQ(sparse_max_abs(SparseMatrix(J.block(n, n, n, n)) - sys.B_w()), 0.0);
}

TEST(Residual, AtZeroState) {
  const DiscreteSystem sys(smooth_spec(Supported{}, Linearity::Nonlinear), build_grid(kUnitSquare, 10));
  const auto n = static_cast<Eigen::Index>(sys.field_size());
  const Vector F = sys.residual(Vector::Zero(static_cast<Eigen::Index>(sys.size())));
  const Vector& m = sys.mask();
  EXPECT_LE((m.cwiseProduct(F.head(n)) - m.cwiseProduct(sys.Fphi())).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_LE((m.cwiseProduct(F.segment(n, n)) + m.cwiseProduct(sys.Fw())).lpNorm<Eigen::Infinity>(), 1e-14);
  EXPECT_LE(((Vector::Ones(n) - m).cwiseProduct(F.head(n))).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Residual, HomogeneousZero) {
  ProblemSpec s;
  s.bc = Free{};
  const DiscreteSystem sys(s, build_grid(kUnitSquare, 10));
  EXPECT_EQ(sys.residual(Vector::Zero(static_cast<Eigen::Index>(sys.size()))).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Residual, ParityOfDeflection) {
  ProblemSpec s;
  s.f_phi = [](double x, double y) { return x - y * y; };
  s.bc = Clamped{};
  const DiscreteSystem sys(s, build_grid(kUnitSquare, 10));
  const auto n = static_cast<Eigen::Index>(sys.field_size());
  std::mt19937 rng(1);
  Vector z = random_vector(static_cast<Eigen::Index>(sys.size()), rng);
  Vector zr = z;
  zr.segment(n, n) *= -1.0;
  const Vector a = sys.residual(z), b = sys.residual(zr);
  const Vector& m = sys.mask();
  EXPECT_LE(m.cwiseProduct(a.head(n) - b.head(n)).lpNorm<Eigen::Infinity>(), 1e-9);
  EXPECT_LE(m.cwiseProduct(a.segment(n, n) + b.segment(n, n)).lpNorm<Eigen::Infinity>(),
            1e-12 * a.lpNorm<Eigen::Infinity>());
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937 rng(20240611);
  for (const BoundaryCondition& bc : all_boundary_conditions()) {
    const DiscreteSystem sys(smooth_spec(bc, Linearity::Nonlinear), build_grid(kUnitSquare, 10));
    const auto N = static_cast<Eigen::Index>(sys.size());
    for (int t = 0; t < 3; ++t) {
      const Vector z = random_vector(N, rng, 0.1), v = random_vector(N, rng);
      const double tau = 1e-6;
      const Vector fd = (sys.residual(z + tau * v) - sys.residual(z - tau * v)) / (2 * tau);
      const Vector jv = sys.jacobian(z) * v;
      EXPECT_LE((fd - jv).lpNorm<Eigen::Infinity>(), 1e-5 * jv.lpNorm<Eigen::Infinity>()) << bc_name(bc);
    }
  }
}

TEST(Jacobian, AntisymmetricCoupling) {
  const DiscreteSystem sys(smooth_spec(Clamped{}, Linearity::Nonlinear), build_grid(kUnitSquare, 10));
  const auto n = static_cast<Eigen::Index>(sys.field_size());
  std::mt19937 rng(2);
  const SparseMatrix J = sys.jacobian(random_vector(static_cast<Eigen::Index>(sys.size()), rng));
  const SparseMatrix mask = sys.mask().asDiagonal() * SparseMatrix(J.block(0, n, n, n)) +
                            sys.mask().asDiagonal() * SparseMatrix(J.block(n, 0, n, n));
  EXPECT_LE(sparse_max_abs(mask), 1e-9);
}

TEST(Jacobian, LinearIsStateIndependent) {
  const DiscreteSystem sys(smooth_spec(ClampedFree{}, Linearity::Linear), build_grid(kUnitSquare, 10));
  std::mt19937 rng(4);
  const auto N = static_cast<Eigen::Index>(sys.size());
  const SparseMatrix a = sys.jacobian(random_vector(N, rng)), b = sys.jacobian(random_vector(N, rng));
  EXPECT_EQ(sparse_max_abs(a - b), 0.0);
}

TEST(InitialGuess, Homogeneous) {
  ProblemSpec s;
  s.bc = Supported{};
  const DiscreteSystem sys(s, build_grid(kUnitSquare, 10));
  const State x = sys.initial_guess();
  EXPECT_EQ(x.phi.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(x.w.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(InitialGuess, SnapThroughPrecastShape) {
  const Grid g = build_grid(kUnitSquare, 20);
  const DiscreteSystem sys(snap_through_spec(Clamped{}), g);
  const State x = sys.initial_guess();
  const Vector w0 =
      sample([](double x, double y) { return 0.3 * (1 - (x - 0.5) * (x - 0.5) - (y - 0.5) * (y - 0.5)); }, g).values;
  EXPECT_LE((x.w - w0).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_NEAR(GridFunction(g, x.w)(10, 10), 0.3, 1e-15);
}

TEST(InitialGuess, SolvesPhiBlock) {
  const ManufacturedCase c = make_case(CaseName::CoupledNonlinear);
  for (const BoundaryCondition& bc : all_boundary_conditions()) {
    const DiscreteSystem sys(problem_spec(c, bc), build_grid(kUnitSquare, 20));
    const Vector F = sys.residual(sys.pack(sys.initial_guess()));
    const auto n = static_cast<Eigen::Index>(sys.field_size());
    EXPECT_LE(F.head(n).lpNorm<Eigen::Infinity>(), 1e-10 * sys.Fphi().lpNorm<Eigen::Infinity>()) << bc_name(bc);
  }
}

TEST(PlaneBasis, FullRank) {
  const Grid g = build_grid(kUnitSquare, 8);
  const Eigen::MatrixXd Q = plane_basis(g);
  EXPECT_EQ(Q.cols(), 3);
  EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(Q).rank(), 3);
}

TEST(RegularizeFree, ZeroRhs) {
  const Grid g = build_grid(kUnitSquare, 10);
  const SparseMatrix A = field_matrix(build_operator_set(g), Free{}, Field::W);
  const AugmentedSolution s = regularize_free(A, Vector::Zero(static_cast<Eigen::Index>(g.size())), g);
  EXPECT_EQ(s.w.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(s.a.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(RegularizeFree, ConstraintAndNullSpaceForcing) {
  const Grid g = build_grid(kUnitSquare, 20);
  const SparseMatrix A = field_matrix(build_operator_set(g), Free{}, Field::W);
  const SparseMatrix Q = plane_basis(g);
  const Vector b = pde_mask(g).cwiseProduct(sample([](double x, double y) { return std::cos(3 * x) * y; }, g).values);
  const AugmentedSolution s = regularize_free(A, b, g);
  EXPECT_LE((Q.transpose() * s.w).lpNorm<Eigen::Infinity>(), 1e-10 * s.w.lpNorm<Eigen::Infinity>());
  Eigen::Vector3d c(0.7, -1.3, 2.1);
  const AugmentedSolution t = regularize_free(A, b + Q * c, g);
  EXPECT_LE((t.w - s.w).lpNorm<Eigen::Infinity>(), 1e-8 * s.w.lpNorm<Eigen::Infinity>());
  EXPECT_GT((t.a - s.a).norm(), 0.1);
}

TEST(RegularizeFree, PolynomialCaseConverges) {
  const ManufacturedCase c = make_case(CaseName::BiharmPoly);
  SolverConfig cfg;
  const double e40 = solve_case(c, Free{}, 40, cfg).err_w.linf;
  const double e80 = solve_case(c, Free{}, 80, cfg).err_w.linf;
  EXPECT_GT(e40 / e80, 3.0);
}

TEST(Describe, NamesRowClass) {
  const DiscreteSystem sys(smooth_spec(Clamped{}, Linearity::Nonlinear), build_grid(kUnitSquare, 10));
  EXPECT_NE(sys.describe(sys.grid().flat(-1, 3)).find("ghost"), std::string::npos);
}
