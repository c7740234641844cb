#include "shellsolve/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace shellsolve {

std::string to_string(NodeIndex n) {
  std::ostringstream os;
  os << '(' << n.i << ", " << n.j << ')';
  return os.str();
}

Grid::Grid(Bounds bounds, int N) : bounds_(bounds), N_(N) {
  if (N < 4) {
    throw std::invalid_argument("grid needs N >= 4 subdivisions, got " + std::to_string(N));
  }
  if (!(bounds.x_a < bounds.x_b) || !(bounds.y_a < bounds.y_b) || !std::isfinite(bounds.x_a) ||
      !std::isfinite(bounds.x_b) || !std::isfinite(bounds.y_a) || !std::isfinite(bounds.y_b)) {
    throw std::invalid_argument("degenerate grid bounds");
  }
  hx_ = (bounds.x_b - bounds.x_a) / N;
  hy_ = (bounds.y_b - bounds.y_a) / N;
}

NodeIndex Grid::unflatten(std::size_t k) const {
  const auto m = static_cast<std::size_t>(nodes_per_axis());
  return {static_cast<int>(k % m) - kGhostLayers, static_cast<int>(k / m) - kGhostLayers};
}

Grid build_grid(Bounds bounds, int N) { return Grid(bounds, N); }

GridFunction::GridFunction(const Grid& g, Vector v) : grid(g), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != g.size()) {
    throw std::invalid_argument("grid function size does not match grid");
  }
}

GridFunction sample(const ScalarField& f, const Grid& g) {
  GridFunction out(g);
  const int m = g.N() + kGhostLayers;
  for (int j = -kGhostLayers; j <= m; ++j) {
    for (int i = -kGhostLayers; i <= m; ++i) {
      out(i, j) = f(g.x(i), g.y(j));
    }
  }
  return out;
}

Vector node_x(const Grid& g) {
  return sample([](double x, double) { return x; }, g).values;
}

Vector node_y(const Grid& g) {
  return sample([](double, double y) { return y; }, g).values;
}

std::string to_string(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

std::string to_string(Corner c) {
  switch (c) {
    case Corner::BottomLeft: return "bottom-left";
    case Corner::BottomRight: return "bottom-right";
    case Corner::TopLeft: return "top-left";
    case Corner::TopRight: return "top-right";
  }
  return "?";
}

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Interior: return "interior";
    case NodeKind::Boundary: return "boundary";
    case NodeKind::Ghost: return "ghost";
    case NodeKind::CornerGhost: return "corner-ghost";
  }
  return "?";
}

std::array<int, 2> outward_normal(Side s) {
  switch (s) {
    case Side::Left: return {-1, 0};
    case Side::Right: return {1, 0};
    case Side::Bottom: return {0, -1};
    case Side::Top: return {0, 1};
  }
  return {0, 0};
}

std::array<Side, 2> corner_sides(Corner c) {
  switch (c) {
    case Corner::BottomLeft: return {Side::Left, Side::Bottom};
    case Corner::BottomRight: return {Side::Right, Side::Bottom};
    case Corner::TopLeft: return {Side::Left, Side::Top};
    case Corner::TopRight: return {Side::Right, Side::Top};
  }
  return {Side::Left, Side::Bottom};
}

NodeIndex corner_node(const Grid& g, Corner c) {
  const int N = g.N();
  switch (c) {
    case Corner::BottomLeft: return {0, 0};
    case Corner::BottomRight: return {N, 0};
    case Corner::TopLeft: return {0, N};
    case Corner::TopRight: return {N, N};
  }
  return {0, 0};
}

NodeClass classify_node(const Grid& g, int i, int j) {
  const int N = g.N();
  const bool i_in = i >= 0 && i <= N;
  const bool j_in = j >= 0 && j <= N;
  NodeClass c;
  if (i_in && j_in) {
    if (i > 0 && i < N && j > 0 && j < N) {
      c.kind = NodeKind::Interior;
    } else {
      c.kind = NodeKind::Boundary;
      if (i == 0 || i == N) {
        c.side = i == 0 ? Side::Left : Side::Right;
        c.position = j;
      } else {
        c.side = j == 0 ? Side::Bottom : Side::Top;
        c.position = i;
      }
    }
    return c;
  }
  if (j_in) {
    c.kind = NodeKind::Ghost;
    c.side = i < 0 ? Side::Left : Side::Right;
    c.layer = i < 0 ? -i : i - N;
    c.position = j;
    return c;
  }
  if (i_in) {
    c.kind = NodeKind::Ghost;
    c.side = j < 0 ? Side::Bottom : Side::Top;
    c.layer = j < 0 ? -j : j - N;
    c.position = i;
    return c;
  }
  c.kind = NodeKind::CornerGhost;
  if (i < 0) {
    c.corner = j < 0 ? Corner::BottomLeft : Corner::TopLeft;
  } else {
    c.corner = j < 0 ? Corner::BottomRight : Corner::TopRight;
  }
  return c;
}

std::vector<NodeClass> classify(const Grid& g) {
  std::vector<NodeClass> out(g.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const NodeIndex n = g.unflatten(k);
    out[k] = classify_node(g, n.i, n.j);
  }
  return out;
}

ClassCounts count_classes(const std::vector<NodeClass>& classes) {
  ClassCounts c;
  for (const auto& nc : classes) {
    switch (nc.kind) {
      case NodeKind::Interior: ++c.interior; break;
      case NodeKind::Boundary: ++c.boundary; break;
      case NodeKind::Ghost: ++c.ghost; break;
      case NodeKind::CornerGhost: ++c.corner_ghost; break;
    }
  }
  return c;
}

}  // namespace shellsolve
