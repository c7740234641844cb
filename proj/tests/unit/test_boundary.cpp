#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "shellsolve/boundary.hpp"
#include "shellsolve/mms.hpp"
#include "shellsolve/system.hpp"

using namespace shellsolve;

namespace {

double apply_row(const SparseRow& row, const Vector& u) {
  double s = 0.0;
  for (const auto& [k, c] : row) s += c * u[static_cast<Eigen::Index>(k)];
  return s;
}

double max_coeff_diff(const Stencil& a, const Stencil& b) {
  const Stencil d = a - b;
  double m = 0.0;
  for (const auto& [off, v] : d.terms()) m = std::max(m, std::abs(v));
  return m;
}

double max_coeff(const Stencil& a) {
  double m = 0.0;
  for (const auto& [off, v] : a.terms()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(Omega, Examples) {
  EXPECT_NEAR(transition_omega(0.6, 0.5, 0.1, 0.01), 0.5, 1e-12);
  EXPECT_NEAR(transition_omega(0.4, 0.5, 0.1, 0.01), 0.5, 1e-12);
  EXPECT_NEAR(transition_omega(0.5, 0.5, 0.1, 0.01), 1.0 - (1.0 + std::tanh(-10.0)) / 2.0, 1e-16);
  EXPECT_NEAR(1.0 - transition_omega(0.5, 0.5, 0.1, 0.01), 2.06e-9, 0.01e-9);
  EXPECT_LT(transition_omega(0.8, 0.5, 0.1, 0.01), 1e-15);
}

TEST(Omega, EvenAndMonotone) {
  double prev = 2.0;
  for (int k = 0; k <= 2000; ++k) {
    const double d = 0.5 * k / 2000.0;
    const double a = transition_omega(0.5 + d, 0.5, 0.1, 0.01);
    const double b = transition_omega(0.5 - d, 0.5, 0.1, 0.01);
    ASSERT_NEAR(a, b, 1e-12);
    ASSERT_LE(a, prev + 1e-15);
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
    prev = a;
  }
}

TEST(DirectionalFirst, Examples) {
  const Grid g = build_grid(kUnitSquare, 10);
  const Vector x = sample([](double x, double) { return x; }, g).values;
  const Vector x3 = sample([](double x, double) { return x * x * x; }, g).values;
  EXPECT_NEAR(apply_row(directional_first(g, {1, 0}, {3, 4}), x), 1.0, 1e-13);
  EXPECT_NEAR(apply_row(directional_first(g, {0, 1}, {3, 4}), x), 0.0, 1e-13);
  EXPECT_NEAR(apply_row(directional_first(g, {1, 0}, {0, 4}), x3), g.hx() * g.hx(), 1e-13);
}

TEST(DirectionalFirst, RejectsUnsupportedNode) {
  const Grid g = build_grid(kUnitSquare, 10);
  EXPECT_THROW(directional_first(g, {1, 0}, {-2, 4}), AssemblyError);
}

TEST(BcEquations, OneRowPerGhost) {
  for (int N = 4; N <= 40; ++N) {
    const Grid g = build_grid(kUnitSquare, N);
    const std::size_t physical = static_cast<std::size_t>((N + 1) * (N + 1));
    for (const BoundaryCondition& bc : all_boundary_conditions())
      for (Field f : {Field::Phi, Field::W}) {
        const auto eqs = bc_equations(g, bc, f);
        ASSERT_EQ(eqs.size() + physical, g.size()) << bc_name(bc) << " N=" << N;
        std::set<std::size_t> targets;
        for (const BcEquation& e : eqs) {
          ASSERT_FALSE(g.is_physical(e.target.i, e.target.j));
          targets.insert(g.flat(e.target));
        }
        ASSERT_EQ(targets.size(), eqs.size());
      }
  }
}

TEST(BcEquations, ClampedRows) {
  const Grid g = build_grid(kUnitSquare, 10);
  const SideConditions sc = side_conditions(g, Clamped{}, Field::W, Side::Bottom, {4, 0});
  EXPECT_TRUE(sc.first_is_dirichlet);
  EXPECT_EQ(max_coeff_diff(sc.first, Stencil::identity()), 0.0);
  const Vector plane = sample([](double x, double y) { return 2 * x - 3 * y + 0.5; }, g).values;
  // Dirichlet row sees the plane value; normal derivative row sees -dplane/dy.
  EXPECT_NEAR(sc.first.apply(GridFunction(g, plane), {4, 0}), 2 * 0.4 + 0.5, 1e-13);
  EXPECT_NEAR(sc.second.apply(GridFunction(g, plane), {4, 0}), 3.0, 1e-12);
}

TEST(BcEquations, MixedDegeneratesToPureOutsideWindow) {
  const Grid g = build_grid(kUnitSquare, 10);
  const ClampedSupported cs{0.55, 1e-3, 1e-3};
  const auto a = bc_equations(g, cs, Field::W);
  const auto b = bc_equations(g, Supported{}, Field::W);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a[k].target, b[k].target);
    ASSERT_EQ(a[k].row.size(), b[k].row.size());
    for (std::size_t t = 0; t < a[k].row.size(); ++t) {
      ASSERT_EQ(a[k].row[t].first, b[k].row[t].first);
      ASSERT_NEAR(a[k].row[t].second, b[k].row[t].second, 1e-12 * std::abs(b[k].row[t].second) + 1e-30);
    }
  }
}

TEST(BcEquations, WindowCentreMatchesClamped) {
  const Grid g = build_grid(kUnitSquare, 10);
  const SideConditions cs = side_conditions(g, ClampedSupported{}, Field::W, Side::Top, {5, 10});
  const SideConditions cl = side_conditions(g, Clamped{}, Field::W, Side::Top, {5, 10});
  const SideConditions su = side_conditions(g, Supported{}, Field::W, Side::Top, {5, 10});
  const double scale = std::max(max_coeff(cl.second), max_coeff(su.second));
  EXPECT_LE(max_coeff_diff(cs.second, cl.second) / scale, 2.1e-9);
}

TEST(BcEquations, BlendConsistency) {
  const Grid g = build_grid(kUnitSquare, 20);
  const ClampedSupported cs{0.5, 0.1, 0.02};
  const ClampedFree cf{0.5, 0.1, 0.02, 0.3};
  for (Side side : {Side::Bottom, Side::Top})
    for (int i = 0; i <= 20; ++i) {
      const NodeIndex at = side == Side::Bottom ? NodeIndex{i, 0} : NodeIndex{i, 20};
      const double om = transition_omega(g.x(i), 0.5, 0.1, 0.02);
      {
        const SideConditions m = side_conditions(g, cs, Field::W, side, at);
        const SideConditions s = side_conditions(g, Supported{}, Field::W, side, at);
        const SideConditions c = side_conditions(g, Clamped{}, Field::W, side, at);
        const Stencil expect = (1 - om) * s.second + om * c.second;
        ASSERT_LE(max_coeff_diff(m.second, expect), 1e-15 * max_coeff(expect) * 10);
      }
      {
        const SideConditions m = side_conditions(g, cf, Field::W, side, at);
        const SideConditions f = side_conditions(g, Free{0.3}, Field::W, side, at);
        const SideConditions c = side_conditions(g, Clamped{}, Field::W, side, at);
        const Stencil e1 = (1 - om) * f.first + om * c.first;
        const Stencil e2 = (1 - om) * f.second + om * c.second;
        ASSERT_LE(max_coeff_diff(m.first, e1), 1e-14 * max_coeff(e1));
        ASSERT_LE(max_coeff_diff(m.second, e2), 1e-14 * max_coeff(e2));
      }
    }
}

TEST(BcEquations, LeftRightCarryPureConditions) {
  const Grid g = build_grid(kUnitSquare, 10);
  const SideConditions m = side_conditions(g, ClampedFree{}, Field::W, Side::Left, {0, 5});
  const SideConditions f = side_conditions(g, Free{}, Field::W, Side::Left, {0, 5});
  EXPECT_EQ(max_coeff_diff(m.first, f.first), 0.0);
  EXPECT_EQ(max_coeff_diff(m.second, f.second), 0.0);
}

TEST(BcEquations, ExactSolutionsSatisfyRowsToSecondOrder) {
  // Compact-support polynomial bump: vanishes with its first three derivatives
  // on every edge, like the manufactured solutions, but not symmetrically.
  const auto bump = [](double t) { return std::pow(t * (1 - t), 4) * (1 + t); };
  const ScalarField u = [&](double x, double y) { return bump(x) * bump(y) * 1e3; };
  for (const BoundaryCondition& bc : all_boundary_conditions())
    for (Field f : {Field::Phi, Field::W}) {
      std::vector<double> res;
      for (int N : {20, 40, 80}) {
        const Grid g = build_grid(kUnitSquare, N);
        const Vector v = sample(u, g).values;
        double m = 0.0;
        for (const BcEquation& e : bc_equations(g, bc, f)) m = std::max(m, std::abs(apply_row(e.row, v) - e.rhs));
        res.push_back(m);
      }
      const double floor = 1e-7;
      if (res[2] > floor) {
        EXPECT_GE(std::log2(res[1] / res[2]), 1.8) << bc_name(bc) << " " << res[1] << " " << res[2];
      }
    }
}

TEST(BcEquations, FreePlaneNullSpace) {
  const Grid g = build_grid(kUnitSquare, 12);
  const OperatorSet ops = build_operator_set(g);
  const SparseMatrix A = field_matrix(ops, Free{}, Field::W);
  const double scale = A.cwiseAbs().toDense().rowwise().sum().maxCoeff();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int t = 0; t < 10; ++t) {
    const double c1 = U(rng), c2 = U(rng), c3 = U(rng);
    const Vector p = sample([&](double x, double y) { return c1 * x + c2 * y + c3; }, g).values;
    EXPECT_LE((A * p).lpNorm<Eigen::Infinity>(), 1e-12 * scale * p.lpNorm<Eigen::Infinity>());
  }
  EXPECT_TRUE(has_plane_null_space(Free{}, Field::W));
  EXPECT_FALSE(has_plane_null_space(Free{}, Field::Phi));
  EXPECT_FALSE(has_plane_null_space(ClampedFree{}, Field::W));
}

TEST(BcValidate, RejectsBadParameters) {
  const Grid g = build_grid(kUnitSquare, 10);
  EXPECT_THROW(validate(Free{0.5}, g), std::invalid_argument);
  EXPECT_THROW(validate(Free{-0.1}, g), std::invalid_argument);
  EXPECT_THROW(validate(ClampedSupported{0.5, 0.0, 0.01}, g), std::invalid_argument);
  EXPECT_THROW(validate(ClampedSupported{0.5, 0.1, 0.0}, g), std::invalid_argument);
  EXPECT_THROW(validate(ClampedFree{0.05, 0.1, 0.01, 0.3}, g), std::invalid_argument);
  EXPECT_NO_THROW(validate(ClampedFree{}, g));
  EXPECT_THROW(bc_from_name("hinged"), std::invalid_argument);
}
