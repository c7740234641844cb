#include "shellsolve/stencils.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace shellsolve {

Stencil Stencil::identity() {
  Stencil s;
  s.terms_[{0, 0}] = 1.0;
  return s;
}

Stencil Stencil::point(int di, int dj, double w) {
  Stencil s;
  s.terms_[{di, dj}] = w;
  return s;
}

Stencil Stencil::dx(const Grid& g) {
  Stencil s;
  s.terms_[{1, 0}] = 0.5 / g.hx();
  s.terms_[{-1, 0}] = -0.5 / g.hx();
  return s;
}

Stencil Stencil::dy(const Grid& g) {
  Stencil s;
  s.terms_[{0, 1}] = 0.5 / g.hy();
  s.terms_[{0, -1}] = -0.5 / g.hy();
  return s;
}

Stencil Stencil::dxx(const Grid& g) {
  const double c = 1.0 / (g.hx() * g.hx());
  Stencil s;
  s.terms_[{-1, 0}] = c;
  s.terms_[{0, 0}] = -2.0 * c;
  s.terms_[{1, 0}] = c;
  return s;
}

Stencil Stencil::dyy(const Grid& g) {
  const double c = 1.0 / (g.hy() * g.hy());
  Stencil s;
  s.terms_[{0, -1}] = c;
  s.terms_[{0, 0}] = -2.0 * c;
  s.terms_[{0, 1}] = c;
  return s;
}

Stencil Stencil::dxy(const Grid& g) {
  const double c = 0.25 / (g.hx() * g.hy());
  Stencil s;
  s.terms_[{1, 1}] = c;
  s.terms_[{-1, 1}] = -c;
  s.terms_[{1, -1}] = -c;
  s.terms_[{-1, -1}] = c;
  return s;
}

Stencil& Stencil::add(const Stencil& other, double scale) {
  for (const auto& [off, w] : other.terms_) {
    terms_[off] += scale * w;
  }
  return *this;
}

Stencil& Stencil::scale(double s) {
  for (auto& [off, w] : terms_) {
    w *= s;
  }
  return *this;
}

Stencil Stencil::compose(const Stencil& inner) const {
  Stencil out;
  for (const auto& [a, wa] : terms_) {
    for (const auto& [b, wb] : inner.terms_) {
      out.terms_[{a.first + b.first, a.second + b.second}] += wa * wb;
    }
  }
  return out;
}

bool Stencil::fits(const Grid& g, NodeIndex at) const {
  for (const auto& [off, w] : terms_) {
    if (!g.contains(at.i + off.first, at.j + off.second)) {
      return false;
    }
  }
  return true;
}

double Stencil::apply(const GridFunction& u, NodeIndex at) const {
  double acc = 0.0;
  for (const auto& [off, w] : terms_) {
    acc += w * u(at.i + off.first, at.j + off.second);
  }
  return acc;
}

SparseRow materialize(const Stencil& s, const Grid& g, NodeIndex at) {
  SparseRow row;
  row.reserve(s.terms().size());
  for (const auto& [off, w] : s.terms()) {
    const int i = at.i + off.first;
    const int j = at.j + off.second;
    if (!g.contains(i, j)) {
      throw AssemblyError("stencil at node " + to_string(at) + " reaches " +
                          to_string(NodeIndex{i, j}) + " outside the grid");
    }
    if (w != 0.0) {
      row.emplace_back(g.flat(i, j), w);
    }
  }
  return row;
}

bool is_supported(const Grid& g, DiffOp op, int i, int j) {
  const int N = g.N();
  if (!g.contains(i, j)) {
    return false;
  }
  const bool ix = i >= -1 && i <= N + 1;
  const bool jy = j >= -1 && j <= N + 1;
  switch (op) {
    case DiffOp::Dxx: return ix;
    case DiffOp::Dyy: return jy;
    case DiffOp::Dxy: return ix && jy;
    case DiffOp::Biharmonic: return g.is_physical(i, j);
  }
  return false;
}

std::vector<bool> support_mask(const Grid& g, DiffOp op) {
  std::vector<bool> mask(g.size());
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const NodeIndex n = g.unflatten(k);
    mask[k] = is_supported(g, op, n.i, n.j);
  }
  return mask;
}

namespace {

template <typename Fn>
GridFunction apply_pointwise(const GridFunction& u, DiffOp op, Fn&& fn) {
  const Grid& g = u.grid;
  GridFunction out(g);
  const int hi = g.N() + kGhostLayers;
  for (int j = -kGhostLayers; j <= hi; ++j) {
    for (int i = -kGhostLayers; i <= hi; ++i) {
      if (is_supported(g, op, i, j)) {
        out(i, j) = fn(i, j);
      }
    }
  }
  return out;
}

}  // namespace

GridFunction apply_dxx(const GridFunction& u) {
  const double c = 1.0 / (u.grid.hx() * u.grid.hx());
  return apply_pointwise(u, DiffOp::Dxx, [&](int i, int j) {
    return (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) * c;
  });
}

GridFunction apply_dyy(const GridFunction& u) {
  const double c = 1.0 / (u.grid.hy() * u.grid.hy());
  return apply_pointwise(u, DiffOp::Dyy, [&](int i, int j) {
    return (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) * c;
  });
}

GridFunction apply_dxy(const GridFunction& u) {
  const double c = 0.25 / (u.grid.hx() * u.grid.hy());
  return apply_pointwise(u, DiffOp::Dxy, [&](int i, int j) {
    return (u(i + 1, j + 1) - u(i - 1, j + 1) - u(i + 1, j - 1) + u(i - 1, j - 1)) * c;
  });
}

GridFunction apply_biharmonic(const GridFunction& u) {
  const GridFunction uxx = apply_dxx(u);
  const GridFunction uyy = apply_dyy(u);
  const GridFunction uxxxx = apply_dxx(uxx);
  const GridFunction uxxyy = apply_dyy(uxx);
  const GridFunction uyyyy = apply_dyy(uyy);
  return apply_pointwise(u, DiffOp::Biharmonic, [&](int i, int j) {
    return uxxxx(i, j) + 2.0 * uxxyy(i, j) + uyyyy(i, j);
  });
}

GridFunction apply_Lh(const GridFunction& u, const GridFunction& v) {
  const GridFunction uxx = apply_dxx(u), uyy = apply_dyy(u), uxy = apply_dxy(u);
  const GridFunction vxx = apply_dxx(v), vyy = apply_dyy(v), vxy = apply_dxy(v);
  return apply_pointwise(u, DiffOp::Dxy, [&](int i, int j) {
    return uxx(i, j) * vyy(i, j) + uyy(i, j) * vxx(i, j) - 2.0 * uxy(i, j) * vxy(i, j);
  });
}

namespace {

SparseMatrix assemble_operator(const Grid& g, const Stencil& s, DiffOp op) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Triplet> trips;
  trips.reserve(g.size() * s.terms().size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const NodeIndex node = g.unflatten(k);
    if (!is_supported(g, op, node.i, node.j)) {
      continue;
    }
    for (const auto& [col, w] : materialize(s, g, node)) {
      trips.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(col), w);
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

OperatorSet build_operator_set(const Grid& g) {
  OperatorSet ops{g, {}, {}, {}, {}};
  ops.Mxx = assemble_operator(g, Stencil::dxx(g), DiffOp::Dxx);
  ops.Myy = assemble_operator(g, Stencil::dyy(g), DiffOp::Dyy);
  ops.Mxy = assemble_operator(g, Stencil::dxy(g), DiffOp::Dxy);

  SparseMatrix xx = ops.Mxx * ops.Mxx;
  SparseMatrix xy = ops.Mxx * ops.Myy;
  SparseMatrix yy = ops.Myy * ops.Myy;
  SparseMatrix bih = xx + 2.0 * xy + yy;

  Vector keep(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const NodeIndex node = g.unflatten(k);
    keep[static_cast<Eigen::Index>(k)] = is_supported(g, DiffOp::Biharmonic, node.i, node.j) ? 1.0 : 0.0;
  }
  ops.Mbih = keep.asDiagonal() * bih;
  ops.Mbih.prune([](Eigen::Index, Eigen::Index, double v) { return std::abs(v) > 1e-15; });
  ops.Mbih.makeCompressed();
  return ops;
}

SparseMatrix build_MLh(const Vector& u, const OperatorSet& ops) {
  const Vector uxx = ops.Mxx * u;
  const Vector uyy = ops.Myy * u;
  const Vector uxy = ops.Mxy * u;
  SparseMatrix a = uxx.asDiagonal() * ops.Myy;
  SparseMatrix b = uyy.asDiagonal() * ops.Mxx;
  SparseMatrix c = uxy.asDiagonal() * ops.Mxy;
  SparseMatrix out = a + b - 2.0 * c;
  out.prune(0.0);
  return out;
}

Vector apply_Lh(const OperatorSet& ops, const Vector& u, const Vector& v) {
  const Vector uxx = ops.Mxx * u, uyy = ops.Myy * u, uxy = ops.Mxy * u;
  const Vector vxx = ops.Mxx * v, vyy = ops.Myy * v, vxy = ops.Mxy * v;
  return uxx.cwiseProduct(vyy) + uyy.cwiseProduct(vxx) - 2.0 * uxy.cwiseProduct(vxy);
}

void write_matrix_market(std::ostream& os, const SparseMatrix& m) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  os << std::setprecision(17);
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace shellsolve
