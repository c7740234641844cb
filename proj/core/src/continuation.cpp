#include "shellsolve/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shellsolve {

namespace {

constexpr double kMaxChordRatio = 4.0;

/// F(.; xi) at a frozen xi, for the natural-parameter bootstrap.
class FrozenParameter : public NonlinearProblem {
 public:
  FrozenParameter(const ParameterizedProblem& p, double xi) : p_(p), xi_(xi) {}
  std::size_t size() const override { return p_.size(); }
  Vector residual(const Vector& z) const override { return p_.residual(z, xi_); }
  SparseMatrix jacobian(const Vector& z) const override { return p_.jacobian(z, xi_); }
  double increment_norm(const Vector& dz) const override { return p_.increment_norm(dz); }
  std::size_t border() const override { return p_.border(); }

 private:
  const ParameterizedProblem& p_;
  double xi_;
};

// [[J, f], [r^T, c]].
SparseMatrix bordered(const SparseMatrix& J, const Vector& f, const Vector& r, double c) {
  const Eigen::Index n = J.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(J.nonZeros() + 2 * n + 1));
  for (Eigen::Index col = 0; col < J.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(J, col); it; ++it) {
      t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (f[k] != 0.0) t.emplace_back(k, n, f[k]);
    if (r[k] != 0.0) t.emplace_back(n, k, r[k]);
  }
  t.emplace_back(n, n, c);
  SparseMatrix A(n + 1, n + 1);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

double weighted_norm(const Vector& w, const Vector& y) { return std::sqrt(arclength_dot(w, y, y)); }

Vector stack(const Vector& z, double xi) {
  Vector y(z.size() + 1);
  y.head(z.size()) = z;
  y[z.size()] = xi;
  return y;
}


}  // namespace

double arclength_dot(const Vector& weights, const Vector& a, const Vector& b) {
  return weights.cwiseProduct(a).dot(b);
}

double load_scale(const ParameterizedProblem& p, const Vector& z0, double xi0) {
  const Vector dz = linear_solve(p.jacobian(z0, xi0), p.dF_dxi(z0, xi0), {}, p.border());
  const Vector w = p.arclength_weights();
  const auto n = dz.size();
  const double sens = std::sqrt(w.head(n).cwiseProduct(dz).dot(dz));
  if (!(sens > 0.0) || !std::isfinite(sens)) {
    throw std::invalid_argument("load_scale: the load does not move the solution");
  }
  return 1.0 / sens;
}

UniformLoadProblem::UniformLoadProblem(const DiscreteSystem& sys, double xi_scale)
    : sys_(sys), load_(sys.phi_load_direction()), xi_scale_(xi_scale) {
  if (!(xi_scale > 0.0)) throw std::invalid_argument("xi_scale must be positive");
}

Vector UniformLoadProblem::residual(const Vector& z, double xi) const {
  Vector F = sys_.residual(z);
  F += xi * load_;
  return F;
}

Vector UniformLoadProblem::arclength_weights() const {
  const auto n = static_cast<Eigen::Index>(sys_.field_size());
  const double per_node = 1.0 / sys_.mask().sum();
  Vector w = Vector::Zero(static_cast<Eigen::Index>(size()) + 1);
  // Phi follows from (W, xi), so W and xi alone parametrize the branch;
  // including Phi would let its linear growth in xi dominate the metric.
  w.segment(n, n) = per_node * sys_.mask();
  w[w.size() - 1] = 1.0 / (xi_scale_ * xi_scale_);
  return w;
}

Vector CircleProblem::residual(const Vector& z, double xi) const {
  Vector F(1);
  F[0] = z[0] * z[0] + xi * xi - 1.0;
  return F;
}

SparseMatrix CircleProblem::jacobian(const Vector& z, double) const {
  SparseMatrix J(1, 1);
  J.insert(0, 0) = 2.0 * z[0];
  return J;
}

Vector CircleProblem::dF_dxi(const Vector&, double xi) const {
  Vector d(1);
  d[0] = 2.0 * xi;
  return d;
}

void validate(const ContinuationConfig& cfg) {
  if (!(cfg.ds_min > 0.0 && cfg.ds_min <= cfg.ds0 && cfg.ds0 <= cfg.ds_max)) {
    throw std::invalid_argument("continuation needs 0 < ds_min <= ds0 <= ds_max");
  }
  if (!(cfg.dxi_bootstrap != 0.0)) throw std::invalid_argument("continuation dxi_bootstrap must be nonzero");
  if (cfg.max_steps < 1) throw std::invalid_argument("continuation max_steps must be at least 1");
  if (cfg.max_folds < 0) throw std::invalid_argument("continuation max_folds must be non-negative");
  validate(cfg.corrector);
}

Vector compute_tangent(const ContinuationPoint& prev, const Vector& z, double xi, const Vector& weights) {
  const Vector d = stack(z - prev.z, xi - prev.xi);
  const double norm = weighted_norm(weights, d);
  if (!(norm > 0.0)) {
    throw std::invalid_argument("compute_tangent: points coincide");
  }
  Vector t = d / norm;
  if (prev.tangent.size() == t.size() && arclength_dot(weights, t, prev.tangent) < 0.0) {
    t = -t;
  }
  return t;
}

Vector exact_tangent(const ParameterizedProblem& p, const Vector& z, double xi, const Vector& orient) {
  const Vector w = p.arclength_weights();
  const Eigen::Index n = z.size();
  const Vector r = w.head(n).cwiseProduct(orient.head(n));
  const SparseMatrix A = bordered(p.jacobian(z, xi), p.dF_dxi(z, xi), r, w[n] * orient[n]);
  Vector rhs = Vector::Zero(n + 1);
  rhs[n] = 1.0;
  Vector t = linear_solve(A, rhs, {}, p.border() + 1);
  t /= weighted_norm(w, t);
  if (arclength_dot(w, t, orient) < 0.0) {
    t = -t;
  }
  return t;
}

std::optional<ContinuationPoint> pac_step(const ParameterizedProblem& p, const ContinuationPoint& prev,
                                          double ds, const SolverConfig& corrector) {
  const auto n = static_cast<Eigen::Index>(p.size());
  const Vector w = p.arclength_weights();
  const Vector& t = prev.tangent;
  const Vector r = w.head(n).cwiseProduct(t.head(n));
  const double c = w[n] * t[n];

  Vector z = prev.z + ds * t.head(n);
  double xi = prev.xi + ds * t[n];
  bool converged = false;
  for (int it = 0; it < corrector.max_iter; ++it) {
    Vector G(n + 1);
    G.head(n) = p.residual(z, xi);
    G[n] = r.dot(z - prev.z) + c * (xi - prev.xi) - ds;
    Vector dy;
    try {
      dy = -linear_solve(bordered(p.jacobian(z, xi), p.dF_dxi(z, xi), r, c), G, {}, p.border() + 1);
    } catch (const SingularMatrixError&) {
      return std::nullopt;
    }
    z += dy.head(n);
    xi += dy[n];
    const double inc = p.increment_norm(dy.head(n)) + std::sqrt(w[n]) * std::abs(dy[n]);
    if (!std::isfinite(inc)) {
      return std::nullopt;
    }
    if (inc < corrector.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    return std::nullopt;
  }
  const double chord = weighted_norm(w, stack(z - prev.z, xi - prev.xi));
  // A chord far longer than ds means the corrector left the local branch.
  if (chord > kMaxChordRatio * ds) {
    return std::nullopt;
  }
  ContinuationPoint out;
  out.z = std::move(z);
  out.xi = xi;
  out.s = prev.s + chord;
  out.tangent = prev.tangent;
  return out;
}

double center_value(const Grid& g, const Vector& w) {
  const Bounds& b = g.bounds();
  const double fi = (0.5 * (b.x_a + b.x_b) - b.x_a) / g.hx();
  const double fj = (0.5 * (b.y_a + b.y_b) - b.y_a) / g.hy();
  const int i0 = std::min(static_cast<int>(std::floor(fi)), g.N() - 1);
  const int j0 = std::min(static_cast<int>(std::floor(fj)), g.N() - 1);
  const double a = fi - i0;
  const double c = fj - j0;
  auto at = [&](int i, int j) { return w[static_cast<Eigen::Index>(g.flat(i, j))]; };
  return (1 - a) * (1 - c) * at(i0, j0) + a * (1 - c) * at(i0 + 1, j0) + (1 - a) * c * at(i0, j0 + 1) +
         a * c * at(i0 + 1, j0 + 1);
}

double l2_norm(const Grid& g, const Vector& w) {
  double sum = 0.0;
  for (int j = 0; j <= g.N(); ++j) {
    for (int i = 0; i <= g.N(); ++i) {
      const double v = w[static_cast<Eigen::Index>(g.flat(i, j))];
      sum += v * v;
    }
  }
  return std::sqrt(g.hx() * g.hy() * sum);
}

ProblemSpec snap_through_spec(const BoundaryCondition& bc) {
  ProblemSpec spec;
  spec.w0 = [](double x, double y) { return 0.3 * (1.0 - (x - 0.5) * (x - 0.5) - (y - 0.5) * (y - 0.5)); };
  spec.bc = bc;
  spec.linearity = Linearity::Nonlinear;
  return spec;
}

namespace {

// Locates the fold between a and c (tangent xi-components of opposite sign)
// by regula falsi on the exact tangent's xi-component along the chord a -> c.
std::optional<Fold> refine_fold(const ParameterizedProblem& p, const ContinuationPoint& a, const ContinuationPoint& c,
                                const ContinuationConfig& cfg, const Observables& obs) {
  const Vector w = p.arclength_weights();
  const Vector chord = stack(c.z - a.z, c.xi - a.xi);
  const double len = weighted_norm(w, chord);
  if (!(len > 0.0)) return std::nullopt;
  ContinuationPoint anchor = a;
  anchor.tangent = chord / len;

  auto g_at = [&](const ContinuationPoint& pt) {
    return exact_tangent(p, pt.z, pt.xi, anchor.tangent)[static_cast<Eigen::Index>(p.size())];
  };
  double lo = 0.0, hi = len;
  double g_lo = g_at(a), g_hi = g_at(c);
  if (!(g_lo * g_hi < 0.0)) return std::nullopt;

  ContinuationPoint best = std::abs(g_lo) < std::abs(g_hi) ? a : c;
  double best_g = std::min(std::abs(g_lo), std::abs(g_hi));
  int side = 0;
  for (int it = 0; it < 60 && best_g > cfg.fold_tol && hi - lo > 1e-14 * len; ++it) {
    double sigma = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
    if (!(sigma > lo && sigma < hi)) sigma = 0.5 * (lo + hi);
    auto pt = pac_step(p, anchor, sigma, cfg.corrector);
    if (!pt) {
      sigma = 0.5 * (lo + hi);
      pt = pac_step(p, anchor, sigma, cfg.corrector);
      if (!pt) return std::nullopt;
    }
    const double g = g_at(*pt);
    if (std::abs(g) < best_g) {
      best_g = std::abs(g);
      best = *pt;
    }
    // Illinois modification keeps regula falsi from stalling on one end.
    if (g * g_lo > 0.0) {
      lo = sigma;
      g_lo = g;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    } else {
      hi = sigma;
      g_hi = g;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    }
  }
  Fold f;
  f.xi = best.xi;
  f.s = a.s + weighted_norm(w, stack(best.z - a.z, best.xi - a.xi));
  f.obs1 = obs ? obs(best.z).first : 0.0;
  return f;
}

Fold quadratic_fold(const ContinuationPoint& a, const ContinuationPoint& b, const ContinuationPoint& c,
                    const std::vector<double>& obs1) {
  // Vertex of the parabola through (s, xi) at a, b, c.
  const double s0 = a.s, s1 = b.s, s2 = c.s;
  const double d01 = (b.xi - a.xi) / (s1 - s0);
  const double d12 = (c.xi - b.xi) / (s2 - s1);
  const double curv = (d12 - d01) / (s2 - s0);
  Fold f;
  if (curv == 0.0) {
    f.s = s1;
    f.xi = b.xi;
  } else {
    f.s = 0.5 * (s0 + s1) - d01 / (2.0 * curv);
    f.xi = a.xi + d01 * (f.s - s0) + curv * (f.s - s0) * (f.s - s1);
  }
  const double o01 = (obs1[1] - obs1[0]) / (s1 - s0);
  const double o12 = (obs1[2] - obs1[1]) / (s2 - s1);
  const double oc = (o12 - o01) / (s2 - s0);
  f.obs1 = obs1[0] + o01 * (f.s - s0) + oc * (f.s - s0) * (f.s - s1);
  return f;
}

}  // namespace

ContinuationPath trace_branch(const ParameterizedProblem& p, const Vector& z0, const ContinuationConfig& cfg,
                              const Observables& obs) {
  validate(cfg);
  const auto n = static_cast<Eigen::Index>(p.size());
  const Vector w = p.arclength_weights();
  // Share of xi in the unit tangent, in [-1, 1].
  const double xi_unit = std::sqrt(w[n]);
  ContinuationPath path;

  auto observe = [&](const Vector& z) { return obs ? obs(z) : std::pair<double, double>{0.0, 0.0}; };
  auto log_point = [&](int step, const ContinuationPoint& pt, double ds, bool accepted) {
    const auto [o1, o2] = observe(pt.z);
    path.log.push_back({step, pt.s, pt.xi, o1, o2, pt.tangent.size() ? xi_unit * pt.tangent[n] : 0.0, ds, accepted});
  };

  ContinuationPoint p0;
  p0.z = z0;
  p0.xi = cfg.xi0;
  const double xi1 = cfg.xi0 + cfg.dxi_bootstrap / xi_unit;
  const FrozenParameter frozen(p, xi1);
  const VectorSolveResult boot = newton(frozen, z0, cfg.corrector);
  if (!boot.report.converged) {
    path.diagnostic = "bootstrap solve at xi=" + std::to_string(xi1) + " did not converge";
    return path;
  }
  ContinuationPoint p1;
  p1.z = boot.z;
  p1.xi = xi1;
  p1.tangent = compute_tangent(p0, p1.z, p1.xi, w);
  p0.tangent = p1.tangent;
  p1.s = weighted_norm(w, stack(p1.z - p0.z, p1.xi - p0.xi));
  path.points = {p0, p1};
  log_point(0, p0, 0.0, true);
  log_point(1, p1, p1.s, true);

  double ds = cfg.ds0;
  int since_last_fold = 0;
  for (int step = 2; step < cfg.max_steps + 2; ++step) {
    const ContinuationPoint& prev = path.points.back();
    const double eff = ds * std::max(xi_unit * std::abs(prev.tangent[n]), 0.1);
    auto next = pac_step(p, prev, eff, cfg.corrector);
    if (!next) {
      ContinuationPoint rejected = prev;
      rejected.s = prev.s + eff;
      log_point(step, rejected, eff, false);
      ds *= 0.5;
      if (ds < cfg.ds_min) {
        path.diagnostic = "step size fell below ds_min at xi=" + std::to_string(prev.xi);
        return path;
      }
      continue;
    }
    next->tangent = compute_tangent(prev, next->z, next->xi, w);
    path.points.push_back(std::move(*next));
    const ContinuationPoint& cur = path.points.back();
    log_point(step, cur, eff, true);
    ds = std::min(1.5 * ds, cfg.ds_max);
    ++since_last_fold;

    const std::size_t k = path.points.size() - 1;
    const double t_prev = path.points[k - 1].tangent[n];
    const double t_cur = cur.tangent[n];
    if (k >= 2 && t_prev * t_cur < 0.0) {
      const ContinuationPoint& a = path.points[k - 2];
      std::optional<Fold> f = refine_fold(p, a, cur, cfg, obs);
      if (!f) {
        f = quadratic_fold(a, path.points[k - 1], cur,
                           {observe(a.z).first, observe(path.points[k - 1].z).first, observe(cur.z).first});
      }
      f->index = k - 1;
      f->xi_max = t_prev > 0.0;
      path.folds.push_back(*f);
      since_last_fold = 0;
    }

    if (cfg.max_folds > 0 && static_cast<int>(path.folds.size()) >= cfg.max_folds) {
      const Fold& first = path.folds.front();
      const bool passed = first.xi_max ? cur.xi > first.xi : cur.xi < first.xi;
      if (passed || since_last_fold >= cfg.tail_steps) {
        path.complete = true;
        return path;
      }
    }
  }
  path.complete = cfg.max_folds == 0;
  if (!path.complete) {
    path.diagnostic = "max_steps reached with " + std::to_string(path.folds.size()) + " fold(s)";
  }
  return path;
}

}  // namespace shellsolve

namespace shellsolve {

ContinuationPath trace_snap_through(const BoundaryCondition& bc, const Grid& g, const ContinuationConfig& cfg) {
  validate(cfg);
  const DiscreteSystem sys(snap_through_spec(bc), g);
  const UniformLoadProblem unit(sys);
  const FrozenParameter start(unit, cfg.xi0);
  const VectorSolveResult r0 = newton(start, sys.pack(sys.initial_guess()), cfg.corrector);
  if (!r0.report.converged) {
    ContinuationPath path;
    path.diagnostic = "initial solve at xi=" + std::to_string(cfg.xi0) + " did not converge: " + r0.report.message;
    return path;
  }
  const UniformLoadProblem prob(sys, load_scale(unit, r0.z, cfg.xi0));
  const Observables obs = [&](const Vector& z) {
    const State s = sys.unpack(z);
    return std::make_pair(center_value(g, s.w), l2_norm(g, s.w));
  };
  return trace_branch(prob, r0.z, cfg, obs);
}

}  // namespace shellsolve
