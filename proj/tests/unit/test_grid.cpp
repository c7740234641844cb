#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "shellsolve/grid.hpp"

using namespace shellsolve;

TEST(Grid, UnitSquareN10) {
  const Grid g = build_grid(kUnitSquare, 10);
  EXPECT_EQ(g.nodes_per_axis(), 15);
  EXPECT_EQ(g.size(), 225u);
  EXPECT_DOUBLE_EQ(g.hx(), 0.1);
  EXPECT_DOUBLE_EQ(g.hy(), 0.1);
  EXPECT_DOUBLE_EQ(g.h(), 0.1);
}

TEST(Grid, GhostCornerCoordinates) {
  const Grid g = build_grid(kUnitSquare, 20);
  EXPECT_DOUBLE_EQ(g.x(-2), -0.1);
  EXPECT_DOUBLE_EQ(g.y(-2), -0.1);
  EXPECT_GT(g.x(22), 1.0);
}

TEST(Grid, AnisotropicSpacing) {
  const Grid g = build_grid({0.0, 2.0, 0.0, 1.0}, 10);
  EXPECT_DOUBLE_EQ(g.hx(), 0.2);
  EXPECT_DOUBLE_EQ(g.hy(), 0.1);
  EXPECT_DOUBLE_EQ(g.h(), 0.1);
}

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW(build_grid(kUnitSquare, 3), std::invalid_argument);
  EXPECT_THROW(build_grid({0.0, 0.0, 0.0, 1.0}, 10), std::invalid_argument);
  EXPECT_THROW(build_grid({1.0, 0.0, 0.0, 1.0}, 10), std::invalid_argument);
}

TEST(Grid, FlattenRoundTrip) {
  for (int N = 4; N <= 20; ++N) {
    const Grid g = build_grid(kUnitSquare, N);
    for (std::size_t k = 0; k < g.size(); ++k) ASSERT_EQ(g.flat(g.unflatten(k)), k) << "N=" << N;
  }
}

TEST(Grid, FlatOrderIsIFastest) {
  const Grid g = build_grid(kUnitSquare, 6);
  EXPECT_EQ(g.flat(-2, -2), 0u);
  EXPECT_EQ(g.flat(-1, -2), 1u);
  EXPECT_EQ(g.flat(-2, -1), static_cast<std::size_t>(g.nodes_per_axis()));
}

TEST(Sample, Examples) {
  const Grid g = build_grid(kUnitSquare, 10);
  EXPECT_EQ(sample([](double, double) { return 0.0; }, g).values.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_DOUBLE_EQ(sample([](double x, double) { return x; }, g)(5, 0), 0.5);
  const auto w0 = [](double x, double y) { return 0.3 * (1 - (x - 0.5) * (x - 0.5) - (y - 0.5) * (y - 0.5)); };
  EXPECT_DOUBLE_EQ(sample(w0, g)(5, 5), 0.3);
}

TEST(Sample, IsLinear) {
  const Grid g = build_grid(kUnitSquare, 12);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = U(rng), b = U(rng), c1 = U(rng), c2 = U(rng);
    const ScalarField f = [&](double x, double y) { return std::sin(c1 * x) * y; };
    const ScalarField h = [&](double x, double y) { return std::exp(c2 * y) + x * x; };
    const Vector lhs = sample([&](double x, double y) { return a * f(x, y) + b * h(x, y); }, g).values;
    const Vector rhs = a * sample(f, g).values + b * sample(h, g).values;
    EXPECT_LE((lhs - rhs).lpNorm<Eigen::Infinity>(), 1e-13 * (1.0 + lhs.lpNorm<Eigen::Infinity>()));
  }
}

TEST(Classify, CountsN10) {
  const Grid g = build_grid(kUnitSquare, 10);
  const ClassCounts c = count_classes(classify(g));
  EXPECT_EQ(c.interior, 81u);
  EXPECT_EQ(c.boundary, 40u);
  EXPECT_EQ(c.total(), 225u);
}

TEST(Classify, PartitionsEveryGrid) {
  for (int N = 4; N <= 40; ++N) {
    const Grid g = build_grid(kUnitSquare, N);
    const ClassCounts c = count_classes(classify(g));
    const auto n = static_cast<std::size_t>(N);
    EXPECT_EQ(c.total(), g.size());
    EXPECT_EQ(c.interior, (n - 1) * (n - 1));
    EXPECT_EQ(c.boundary, 4 * n);
    EXPECT_EQ(c.ghost, 8 * (n + 1));
    EXPECT_EQ(c.corner_ghost, 16u);
  }
}

TEST(Classify, BoundaryNodes) {
  const Grid g = build_grid(kUnitSquare, 8);
  EXPECT_EQ(classify_node(g, 0, 3).kind, NodeKind::Boundary);
  EXPECT_EQ(classify_node(g, 0, 0).kind, NodeKind::Boundary);
  EXPECT_EQ(classify_node(g, 3, 3).kind, NodeKind::Interior);
  EXPECT_EQ(classify_node(g, -1, 3).kind, NodeKind::Ghost);
  EXPECT_EQ(classify_node(g, -1, -2).kind, NodeKind::CornerGhost);
  EXPECT_EQ(classify_node(g, 10, 3).layer, 2);
}
