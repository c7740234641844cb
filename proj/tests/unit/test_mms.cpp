#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shellsolve/jet.hpp"
#include "shellsolve/mms.hpp"

using namespace shellsolve;

namespace {

constexpr double kPi = std::numbers::pi;

ManufacturedCase biharmonic_case(JetField w) {
  ManufacturedCase c;
  c.biharmonic_only = true;
  c.linearity = Linearity::Linear;
  c.w_e = std::move(w);
  return c;
}

// 13-point biharmonic of a plain function, two Richardson levels.
double fd_biharmonic(const ScalarField& f, double x, double y) {
  const auto D = [&](double h) {
    const auto u = [&](int i, int j) { return f(x + i * h, y + j * h); };
    const double v = 20 * u(0, 0) - 8 * (u(1, 0) + u(-1, 0) + u(0, 1) + u(0, -1)) +
                     2 * (u(1, 1) + u(-1, 1) + u(1, -1) + u(-1, -1)) + u(2, 0) + u(-2, 0) + u(0, 2) + u(0, -2);
    return v / std::pow(h, 4);
  };
  const double h = 1e-2;
  const double a = (4 * D(h / 2) - D(h)) / 3, b = (4 * D(h / 4) - D(h / 2)) / 3;
  return (16 * b - a) / 15;
}

}  // namespace

TEST(Forcing, ConstantHasNoLoad) {
  const Forcing f = synthesize_forcing(biharmonic_case([](const Jet&, const Jet&) { return Jet(2.5); }));
  EXPECT_EQ(f.f_w(0.3, 0.7), 0.0);
}

TEST(Forcing, QuarticGives24) {
  const Forcing f = synthesize_forcing(biharmonic_case([](const Jet& x, const Jet&) { return pow(x, 4); }));
  EXPECT_NEAR(f.f_w(0.3, 0.7), 24.0, 1e-12);
  EXPECT_NEAR(f.f_w(-1.2, 2.0), 24.0, 1e-12);
}

TEST(Forcing, TrigPointValue) {
  // At (1/4, 1/4): sin^4 = 1, its second derivative is -4k^2 and its fourth
  // is 40k^4 with k = 2 pi, so nabla^4 w = 2*40k^4 + 2*16k^4 = 112 k^4.
  const Forcing f = synthesize_forcing(make_case(CaseName::BiharmTrig));
  const double expect = 112.0 * std::pow(2 * kPi, 4);
  EXPECT_NEAR(f.f_w(0.25, 0.25), expect, 1e-10 * expect);
}

TEST(Forcing, LocalizedThermalData) {
  const ManufacturedCase c = make_case(CaseName::LocalizedThermal);
  EXPECT_FALSE(c.has_exact());
  const Forcing f = synthesize_forcing(c);
  EXPECT_NEAR(f.f_phi(0.75, 0.25), 32634.2, 1e-9);
  EXPECT_EQ(f.f_phi(0.25, 0.75), 0.0);
  EXPECT_NEAR(to_scalar(c.w0)(0.3, 0.5), 0.1, 1e-15);
}

TEST(Jet, MatchesFiniteDifferences) {
  const ManufacturedCase c = make_case(CaseName::CoupledNonlinear);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const JetField& field : {c.phi_e, c.w_e, c.w0}) {
    const ScalarField f = to_scalar(field);
    double scale = 0.0, worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const double x = U(rng), y = U(rng);
      const double exact = field(Jet::x(x), Jet::y(y)).biharmonic();
      scale = std::max(scale, std::abs(exact));
      worst = std::max(worst, std::abs(exact - fd_biharmonic(f, x, y)));
    }
    EXPECT_LE(worst, 1e-6 * scale);
  }
}

TEST(Jet, DerivativeFactorials) {
  const Jet x = Jet::x(0.4), y = Jet::y(-0.3);
  const Jet u = pow(x, 3) * pow(y, 2);
  EXPECT_NEAR(u.derivative(3, 0), 6 * 0.09, 1e-14);
  EXPECT_NEAR(u.derivative(1, 2), 3 * 0.16 * 2, 1e-14);
  EXPECT_NEAR(u.derivative(2, 2), 6 * 0.4 * 2, 1e-14);
  EXPECT_NEAR(bilinear_L(x * x, y * y), 4.0, 1e-14);
  EXPECT_NEAR(sin(x).derivative(4, 0), std::sin(0.4), 1e-14);
}

TEST(ErrorNorms, Examples) {
  const Grid g = build_grid(kUnitSquare, 10);
  const ScalarField f = [](double x, double y) { return std::sin(x + 2 * y); };
  const Vector e = sample(f, g).values;
  const ErrorNorms zero = error_norms(e, f, g);
  EXPECT_EQ(zero.linf, 0.0);
  EXPECT_EQ(zero.l2, 0.0);
  const ErrorNorms shifted = error_norms(e + Vector::Constant(e.size(), 1e-3), f, g);
  EXPECT_NEAR(shifted.linf, 1e-3, 1e-15);
  EXPECT_NEAR(shifted.l2, 1e-3 * std::sqrt(121 * 0.01), 1e-15);
}

TEST(ErrorNorms, GhostsExcluded) {
  const Grid g = build_grid(kUnitSquare, 10);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(g.size()));
  v[static_cast<Eigen::Index>(g.flat(-1, 4))] = 5.0;
  EXPECT_EQ(error_norms(v, Vector::Zero(v.size()), g).linf, 0.0);
}

TEST(ErrorNorms, PlaneInvariantAfterProjection) {
  const Grid g = build_grid(kUnitSquare, 16);
  const Vector num = sample([](double x, double y) { return std::cos(x * y); }, g).values;
  const Vector ex = sample([](double x, double y) { return std::cos(x * y) + 0.01 * x * x; }, g).values;
  const Vector plane = sample([](double x, double y) { return 3 * x - y + 7; }, g).values;
  const double a = error_norms(remove_plane_component(num, g), remove_plane_component(ex, g), g).linf;
  const double b = error_norms(remove_plane_component(num, g), remove_plane_component(ex + plane, g), g).linf;
  EXPECT_NEAR(a, b, 1e-12);
  EXPECT_LE((plane_basis(g).transpose() * remove_plane_component(ex, g)).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(ObservedOrder, Values) {
  EXPECT_NEAR(*observed_order(4e-3, 1e-3, 0.1, 0.05), 2.0, 1e-14);
  EXPECT_FALSE(observed_order(1e-15, 1e-16, 0.1, 0.05).has_value());
}

TEST(Refinement, BiharmonicTrigClamped) {
  const RefinementTable t = refinement_study(make_case(CaseName::BiharmTrig), Clamped{}, SolverConfig{}, {20, 40, 80});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_FALSE(t.rows[0].order_w.has_value());
  ASSERT_TRUE(t.rows[2].order_w.has_value());
  EXPECT_GE(*t.rows[2].order_w, 1.7);
  EXPECT_LE(*t.rows[2].order_w, 2.3);
  for (const RefinementRow& r : t.rows) {
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.bc, "clamped");
  }
}

TEST(Refinement, AnisotropicSpacing) {
  // [0,2] x [0,1] gives h_x = 2 h_y.
  const ManufacturedCase c = make_case(CaseName::BiharmTrig, {0.0, 2.0, 0.0, 1.0});
  const RefinementTable t = refinement_study(c, Supported{}, SolverConfig{}, {20, 40, 80});
  ASSERT_TRUE(t.rows[2].order_w.has_value());
  EXPECT_NEAR(*t.rows[2].order_w, 2.0, 0.3);
}

TEST(Refinement, ParallelMatchesSerial) {
  const ManufacturedCase c = make_case(CaseName::BiharmTrig);
  const RefinementTable a = refinement_study(c, Free{}, SolverConfig{}, {10, 20, 40}, 1);
  const RefinementTable b = refinement_study(c, Free{}, SolverConfig{}, {10, 20, 40}, 3);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(a.rows[k].err_w, b.rows[k].err_w);
}

TEST(Forcing, ResidualOfExactSolutionIsSecondOrder) {
  for (CaseName name : {CaseName::CoupledLinear, CaseName::CoupledNonlinear}) {
    const ManufacturedCase c = make_case(name);
    for (const BoundaryCondition& bc : all_boundary_conditions()) {
      std::vector<double> r;
      for (int N : {20, 40, 80}) {
        const Grid g = build_grid(kUnitSquare, N);
        const DiscreteSystem sys(problem_spec(c, bc), g);
        State s;
        s.phi = sample(to_scalar(c.phi_e), g).values;
        s.w = sample(to_scalar(c.w_e), g).values;
        if (sys.bordered()) s.a = Vector::Zero(3);
        const Vector F = sys.residual(sys.pack(s));
        const auto n = static_cast<Eigen::Index>(sys.field_size());
        const Vector& m = sys.mask();
        r.push_back(std::max(m.cwiseProduct(F.head(n)).lpNorm<Eigen::Infinity>(),
                             m.cwiseProduct(F.segment(n, n)).lpNorm<Eigen::Infinity>()));
      }
      EXPECT_NEAR(std::log2(r[1] / r[2]), 2.0, 0.3) << case_name(name) << " " << bc_name(bc);
    }
  }
}

TEST(Cases, NamesRoundTrip) {
  for (CaseName c : {CaseName::BiharmTrig, CaseName::BiharmPoly, CaseName::CoupledLinear, CaseName::CoupledNonlinear,
                     CaseName::LocalizedThermal})
    EXPECT_EQ(case_from_name(case_name(c)), c);
  EXPECT_THROW(case_from_name("cubic"), std::invalid_argument);
}
