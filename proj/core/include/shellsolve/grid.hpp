#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace shellsolve {

using Vector = Eigen::VectorXd;
using ScalarField = std::function<double(double, double)>;

/// Number of ghost layers carried on every side of the grid.
inline constexpr int kGhostLayers = 2;

struct Bounds {
  double x_a = 0.0;
  double x_b = 1.0;
  double y_a = 0.0;
  double y_b = 1.0;
};

inline constexpr Bounds kUnitSquare{0.0, 1.0, 0.0, 1.0};

struct NodeIndex {
  int i = 0;
  int j = 0;
  friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

std::string to_string(NodeIndex n);

/// Uniform Cartesian grid with two ghost layers per side.
///
/// Node (i, j) sits at (x_a + i*h_x, y_a + j*h_y) with i, j in [-2, N+2].
/// Flat storage is i-fastest: flat(i, j) = (i+2) + (N+5)*(j+2). Every vector
/// in the library that represents a grid function uses this ordering.
class Grid {
 public:
  Grid(Bounds bounds, int N);

  int N() const { return N_; }
  int nodes_per_axis() const { return N_ + 2 * kGhostLayers + 1; }
  std::size_t size() const {
    const auto m = static_cast<std::size_t>(nodes_per_axis());
    return m * m;
  }

  const Bounds& bounds() const { return bounds_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double h() const { return hx_ < hy_ ? hx_ : hy_; }

  double x(int i) const { return bounds_.x_a + i * hx_; }
  double y(int j) const { return bounds_.y_a + j * hy_; }

  bool contains(int i, int j) const {
    return i >= -kGhostLayers && i <= N_ + kGhostLayers && j >= -kGhostLayers &&
           j <= N_ + kGhostLayers;
  }
  bool is_physical(int i, int j) const { return i >= 0 && i <= N_ && j >= 0 && j <= N_; }

  std::size_t flat(int i, int j) const {
    return static_cast<std::size_t>(i + kGhostLayers) +
           static_cast<std::size_t>(nodes_per_axis()) * static_cast<std::size_t>(j + kGhostLayers);
  }
  std::size_t flat(NodeIndex n) const { return flat(n.i, n.j); }
  NodeIndex unflatten(std::size_t k) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.N_ == b.N_ && a.bounds_.x_a == b.bounds_.x_a && a.bounds_.x_b == b.bounds_.x_b &&
           a.bounds_.y_a == b.bounds_.y_a && a.bounds_.y_b == b.bounds_.y_b;
  }

 private:
  Bounds bounds_;
  int N_;
  double hx_;
  double hy_;
};

/// Validates the bounds and subdivision count; throws std::invalid_argument.
Grid build_grid(Bounds bounds, int N);

/// Scalar field on every node of a grid, ghosts included.
struct GridFunction {
  Grid grid;
  Vector values;

  explicit GridFunction(const Grid& g) : grid(g), values(Vector::Zero(static_cast<Eigen::Index>(g.size()))) {}
  GridFunction(const Grid& g, Vector v);

  double& operator()(int i, int j) { return values[static_cast<Eigen::Index>(grid.flat(i, j))]; }
  double operator()(int i, int j) const { return values[static_cast<Eigen::Index>(grid.flat(i, j))]; }
};

GridFunction sample(const ScalarField& f, const Grid& g);

/// Node coordinates as flat vectors, i.e. the columns x and y of the plane basis.
Vector node_x(const Grid& g);
Vector node_y(const Grid& g);

enum class Side { Left, Right, Bottom, Top };
enum class Corner { BottomLeft, BottomRight, TopLeft, TopRight };
enum class NodeKind { Interior, Boundary, Ghost, CornerGhost };

inline constexpr std::array<Side, 4> kSides{Side::Left, Side::Right, Side::Bottom, Side::Top};
inline constexpr std::array<Corner, 4> kCorners{Corner::BottomLeft, Corner::BottomRight,
                                                Corner::TopLeft, Corner::TopRight};

std::string to_string(Side s);
std::string to_string(Corner c);
std::string to_string(NodeKind k);

/// Outward unit normal of a side.
std::array<int, 2> outward_normal(Side s);
/// Sides meeting at a corner, x-side (Left/Right) first.
std::array<Side, 2> corner_sides(Corner c);
/// The physical corner node of a corner.
NodeIndex corner_node(const Grid& g, Corner c);

struct NodeClass {
  NodeKind kind = NodeKind::Interior;
  /// Boundary and Ghost nodes: owning side. Corner boundary nodes report the x-side.
  Side side = Side::Left;
  /// Boundary and Ghost: index along the side.
  int position = 0;
  /// Ghost: 1 or 2.
  int layer = 0;
  Corner corner = Corner::BottomLeft;
};

NodeClass classify_node(const Grid& g, int i, int j);
/// Classification of every node in flat order.
std::vector<NodeClass> classify(const Grid& g);

struct ClassCounts {
  std::size_t interior = 0;
  std::size_t boundary = 0;
  std::size_t ghost = 0;
  std::size_t corner_ghost = 0;
  std::size_t total() const { return interior + boundary + ghost + corner_ghost; }
};

ClassCounts count_classes(const std::vector<NodeClass>& classes);

}  // namespace shellsolve
