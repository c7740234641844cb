#include "shellsolve/boundary.hpp"

#include <cmath>
#include <set>
#include <string>
#include <stdexcept>

namespace shellsolve {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_x_side(Side s) { return s == Side::Left || s == Side::Right; }

NodeIndex node_on_side(const Grid& g, Side s, int t) {
  switch (s) {
    case Side::Left: return {0, t};
    case Side::Right: return {g.N(), t};
    case Side::Bottom: return {t, 0};
    case Side::Top: return {t, g.N()};
  }
  return {0, 0};
}

struct SideGeometry {
  Stencil dn;   // centred first difference along the outward normal
  Stencil dnn;  // compact second difference across the side
  Stencil dtt;  // compact second difference along the side
};

SideGeometry side_geometry(const Grid& g, Side s) {
  const auto n = outward_normal(s);
  SideGeometry geo;
  geo.dn = static_cast<double>(n[0]) * Stencil::dx(g) + static_cast<double>(n[1]) * Stencil::dy(g);
  geo.dnn = is_x_side(s) ? Stencil::dxx(g) : Stencil::dyy(g);
  geo.dtt = is_x_side(s) ? Stencil::dyy(g) : Stencil::dxx(g);
  return geo;
}

SideConditions supported_conditions(const SideGeometry& geo) {
  return {Stencil::identity(), geo.dnn, true};
}

SideConditions clamped_conditions(const SideGeometry& geo) {
  return {Stencil::identity(), geo.dn, true};
}

SideConditions free_conditions(const SideGeometry& geo, double nu) {
  SideConditions c;
  c.first = geo.dnn + nu * geo.dtt;
  c.second = geo.dn.compose(geo.dnn + (2.0 - nu) * geo.dtt);
  c.first_is_dirichlet = false;
  return c;
}

// U(p) - 3 U(p - d) + 3 U(p - 2d) - U(p - 3d), anchored at the outermost point p.
Stencil cubic_extrapolation(int di, int dj) {
  return Stencil::identity() + Stencil::point(-di, -dj, -3.0) + Stencil::point(-2 * di, -2 * dj, 3.0) +
         Stencil::point(-3 * di, -3 * dj, -1.0);
}

Stencil blend(const Stencil& outside, const Stencil& inside, double omega) {
  return (1.0 - omega) * outside + omega * inside;
}

}  // namespace

std::string bc_name(const BoundaryCondition& bc) {
  return std::visit(overloaded{
                        [](const Supported&) { return std::string("supported"); },
                        [](const Clamped&) { return std::string("clamped"); },
                        [](const Free&) { return std::string("free"); },
                        [](const ClampedSupported&) { return std::string("cs"); },
                        [](const ClampedFree&) { return std::string("cf"); },
                    },
                    bc);
}

BoundaryCondition bc_from_name(const std::string& name) {
  if (name == "supported") return Supported{};
  if (name == "clamped") return Clamped{};
  if (name == "free") return Free{};
  if (name == "cs" || name == "clamped-supported") return ClampedSupported{};
  if (name == "cf" || name == "clamped-free") return ClampedFree{};
  throw std::invalid_argument("unknown boundary condition '" + name + "'");
}

std::vector<BoundaryCondition> all_boundary_conditions() {
  return {Supported{}, Clamped{}, Free{}, ClampedSupported{}, ClampedFree{}};
}

void validate(const BoundaryCondition& bc, const Grid& g) {
  auto check_nu = [](double nu) {
    if (!(nu >= 0.0 && nu < 0.5)) {
      throw std::invalid_argument("Poisson ratio must satisfy 0 <= nu < 0.5");
    }
  };
  auto check_window = [&](double x_c, double r_c, double eps) {
    if (!(r_c > 0.0)) throw std::invalid_argument("clamped window radius r_c must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("transition width eps must be positive");
    const Bounds& b = g.bounds();
    if (!(x_c - r_c > b.x_a && x_c + r_c < b.x_b)) {
      throw std::invalid_argument("clamped window must lie strictly inside the top/bottom edges");
    }
  };
  std::visit(overloaded{
                 [](const Supported&) {},
                 [](const Clamped&) {},
                 [&](const Free& f) { check_nu(f.nu); },
                 [&](const ClampedSupported& c) { check_window(c.x_c, c.r_c, c.eps); },
                 [&](const ClampedFree& c) {
                   check_nu(c.nu);
                   check_window(c.x_c, c.r_c, c.eps);
                 },
             },
             bc);
}

bool has_plane_null_space(const BoundaryCondition& bc, Field field) {
  return field == Field::W && std::holds_alternative<Free>(bc);
}

double transition_omega(double x, double x_c, double r_c, double eps) {
  return 1.0 - 0.5 * (std::tanh((std::abs(x - x_c) - r_c) / eps) + 1.0);
}

SparseRow directional_first(const Grid& g, std::array<double, 2> a, NodeIndex node) {
  return materialize(a[0] * Stencil::dx(g) + a[1] * Stencil::dy(g), g, node);
}

SideConditions side_conditions(const Grid& g, const BoundaryCondition& bc, Field field, Side side,
                               NodeIndex node) {
  const SideGeometry geo = side_geometry(g, side);
  const bool windowed_side = !is_x_side(side);
  return std::visit(
      overloaded{
          [&](const Supported&) { return supported_conditions(geo); },
          [&](const Clamped&) { return clamped_conditions(geo); },
          [&](const Free& f) {
            return field == Field::W ? free_conditions(geo, f.nu) : clamped_conditions(geo);
          },
          [&](const ClampedSupported& c) {
            if (!windowed_side) {
              return supported_conditions(geo);
            }
            const double omega = transition_omega(g.x(node.i), c.x_c, c.r_c, c.eps);
            SideConditions out;
            out.first = Stencil::identity();
            out.second = blend(geo.dnn, geo.dn, omega);
            out.first_is_dirichlet = true;
            return out;
          },
          [&](const ClampedFree& c) {
            if (field == Field::Phi) {
              return clamped_conditions(geo);
            }
            const SideConditions fc = free_conditions(geo, c.nu);
            if (!windowed_side) {
              return fc;
            }
            const double omega = transition_omega(g.x(node.i), c.x_c, c.r_c, c.eps);
            SideConditions out;
            out.first = blend(fc.first, Stencil::identity(), omega);
            out.second = blend(fc.second, geo.dn, omega);
            out.first_is_dirichlet = false;
            return out;
          },
      },
      bc);
}

std::vector<BcEquation> bc_equations(const Grid& g, const BoundaryCondition& bc, Field field) {
  validate(bc, g);
  const int N = g.N();
  std::vector<BcEquation> eqs;
  eqs.reserve(8 * static_cast<std::size_t>(N + 1) + 16);

  auto push = [&](const Stencil& s, NodeIndex at, NodeIndex target) {
    eqs.push_back({materialize(s, g, at), 0.0, target});
  };

  for (Side side : kSides) {
    const auto n = outward_normal(side);
    for (int t = 0; t <= N; ++t) {
      const NodeIndex b = node_on_side(g, side, t);
      const NodeIndex g1{b.i + n[0], b.j + n[1]};
      const NodeIndex g2{b.i + 2 * n[0], b.j + 2 * n[1]};
      const SideConditions sc = side_conditions(g, bc, field, side, b);

      bool shared_dirichlet = false;
      if (t == 0 || t == N) {
        Side other = Side::Left;
        if (is_x_side(side)) {
          other = t == 0 ? Side::Bottom : Side::Top;
        } else {
          other = t == 0 ? Side::Left : Side::Right;
        }
        shared_dirichlet =
            sc.first_is_dirichlet && side_conditions(g, bc, field, other, b).first_is_dirichlet;
      }

      if (shared_dirichlet && !is_x_side(side)) {
        // The x-side already pins the corner value; extrapolate the outer ghost.
        push(sc.second, b, g1);
        push(cubic_extrapolation(n[0], n[1]).compose(Stencil::point(2 * n[0], 2 * n[1])), b, g2);
      } else {
        push(sc.first, b, g1);
        push(sc.second, b, g2);
      }
    }
  }

  for (Corner c : kCorners) {
    const NodeIndex cn = corner_node(g, c);
    const int di = cn.i == 0 ? 1 : -1;
    const int dj = cn.j == 0 ? 1 : -1;
    const bool free_corner = field == Field::W && (std::holds_alternative<Free>(bc) ||
                                                   std::holds_alternative<ClampedFree>(bc));
    for (int a = 1; a <= 2; ++a) {
      for (int bb = 1; bb <= 2; ++bb) {
        const NodeIndex ghost{cn.i - a * di, cn.j - bb * dj};
        if (free_corner && a == 1 && bb == 1) {
          push(Stencil::dxy(g), cn, ghost);
          continue;
        }
        push(cubic_extrapolation(-di, -dj), ghost, ghost);
      }
    }
  }

  const std::size_t expected = g.size() - static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(N + 1);
  if (eqs.size() != expected) {
    throw AssemblyError("boundary equation count " + std::to_string(eqs.size()) +
                        " does not match ghost node count " + std::to_string(expected));
  }
  std::set<std::size_t> targets;
  for (const auto& e : eqs) {
    if (g.is_physical(e.target.i, e.target.j) || !targets.insert(g.flat(e.target)).second) {
      throw AssemblyError("boundary equation target " + to_string(e.target) +
                          " is not a unique ghost node");
    }
  }
  return eqs;
}

}  // namespace shellsolve
