#include "shellsolve/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shellsolve {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kDivergence = 1e12;

double inf_norm_of_rows(const SparseMatrix& m) {
  Vector rows = Vector::Zero(m.rows());
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      rows[it.row()] += std::abs(it.value());
    }
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

void check_coupled_size(const DiscreteSystem& sys, const SolverConfig& cfg) {
  if (sys.grid().N() > cfg.max_coupled_N) {
    throw std::invalid_argument("coupled solve on N=" + std::to_string(sys.grid().N()) +
                                " exceeds max_coupled_N=" + std::to_string(cfg.max_coupled_N));
  }
}

SolveResult to_state(const DiscreteSystem& sys, VectorSolveResult r) {
  return {sys.unpack(r.z), std::move(r.report)};
}

}  // namespace

ShellProblem::ShellProblem(const DiscreteSystem& sys) : sys_(sys) {
  scale_ = std::max(inf_norm_of_rows(sys.B_phi()), inf_norm_of_rows(sys.B_w()));
}

double ShellProblem::residual_floor(const Vector& z) const {
  const double data = sys_.Fphi().lpNorm<Eigen::Infinity>() + sys_.Fw().lpNorm<Eigen::Infinity>();
  return 1e-11 * (scale_ * std::max(z.lpNorm<Eigen::Infinity>(), 1.0) + data);
}

std::string method_name(const Method& m) {
  return std::visit(overloaded{
                        [](const Picard&) { return std::string("picard"); },
                        [](const Newton&) { return std::string("newton"); },
                        [](const Dogleg&) { return std::string("dogleg"); },
                    },
                    m);
}

Method method_from_name(const std::string& name) {
  if (name == "picard") return Picard{};
  if (name == "newton") return Newton{};
  if (name == "dogleg") return Dogleg{};
  throw std::invalid_argument("unknown solver method '" + name + "'");
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver tol must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("solver max_iter must be at least 1");
  std::visit(overloaded{
                 [](const Picard& p) {
                   if (!(p.delta >= 0.0 && p.delta <= 1.0)) {
                     throw std::invalid_argument("picard delta must lie in [0, 1]");
                   }
                 },
                 [](const Newton&) {},
                 [](const Dogleg& d) {
                   if (!(d.radius0 > 0.0 && d.radius0 <= d.radius_max)) {
                     throw std::invalid_argument("dogleg radii must satisfy 0 < radius0 <= radius_max");
                   }
                   if (!(d.eta > 0.0 && d.eta < 1.0)) {
                     throw std::invalid_argument("dogleg eta must lie in (0, 1)");
                   }
                 },
             },
             cfg.method);
}

std::optional<double> estimate_rate(const std::vector<double>& increments) {
  const double lo = 100.0 * std::numeric_limits<double>::epsilon();
  auto usable = [&](double e) { return e >= lo && e < 1.0; };
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k + 1 < increments.size(); ++k) {
    if (usable(increments[k]) && usable(increments[k + 1])) {
      sum += std::log(increments[k + 1]) / std::log(increments[k]);
      ++count;
    }
  }
  if (count == 0) {
    return std::nullopt;
  }
  return sum / count;
}

std::optional<double> estimate_order(const std::vector<double>& increments) {
  const double lo = 100.0 * std::numeric_limits<double>::epsilon();
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 1; k + 1 < increments.size(); ++k) {
    const double e0 = increments[k - 1], e1 = increments[k], e2 = increments[k + 1];
    if (e2 >= lo && e2 < e1 && e1 < e0) {
      sum += std::log(e2 / e1) / std::log(e1 / e0);
      ++count;
    }
  }
  if (count == 0) {
    return std::nullopt;
  }
  return sum / count;
}

VectorSolveResult newton(const NonlinearProblem& p, Vector z, const SolverConfig& cfg) {
  validate(cfg);
  SolveReport rep;
  rep.method = "newton";
  Vector F = p.residual(z);
  for (int k = 0; k < cfg.max_iter; ++k) {
    Vector dz;
    try {
      dz = -linear_solve(p.jacobian(z), F, [&p](std::size_t c) { return p.describe(c); }, p.border());
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("Newton step " + std::to_string(k + 1) + ": " + e.what(), e.column(),
                                e.pivot_ratio());
    }
    z += dz;
    F = p.residual(z);
    const double inc = p.increment_norm(dz);
    rep.increments.push_back(p.history_norm(dz));
    rep.steps = k + 1;
    if (!std::isfinite(inc) || inc > kDivergence) {
      rep.message = "diverged";
      break;
    }
    if (inc < cfg.tol || F.lpNorm<Eigen::Infinity>() <= p.residual_floor(z)) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged && rep.message.empty()) {
    rep.message = "max_iter reached";
  }
  rep.rate = estimate_order(rep.increments);
  rep.log_rate = estimate_rate(rep.increments);
  rep.final_residual = F.lpNorm<Eigen::Infinity>();
  return {std::move(z), std::move(rep)};
}

VectorSolveResult dogleg(const NonlinearProblem& p, Vector z, const SolverConfig& cfg) {
  validate(cfg);
  const Dogleg opts = std::holds_alternative<Dogleg>(cfg.method) ? std::get<Dogleg>(cfg.method) : Dogleg{};
  SolveReport rep;
  rep.method = "dogleg";
  double radius = opts.radius0;
  Vector F = p.residual(z);
  double merit = 0.5 * F.squaredNorm();

  for (int k = 0; k < cfg.max_iter; ++k) {
    const SparseMatrix J = p.jacobian(z);
    const Vector g = J.transpose() * F;

    std::optional<Vector> gn;
    try {
      gn = Vector(-linear_solve(J, F, {}, p.border()));
    } catch (const SingularMatrixError&) {
      gn.reset();
    }

    Vector step;
    bool full_gn = false;
    if (gn && gn->norm() <= radius) {
      step = *gn;
      full_gn = true;
    } else {
      const double gnorm = g.norm();
      if (gnorm == 0.0) {
        rep.message = "zero gradient";
        break;
      }
      const Vector Jg = J * g;
      const double alpha = g.squaredNorm() / std::max(Jg.squaredNorm(), std::numeric_limits<double>::min());
      const Vector cauchy = -alpha * g;
      if (!gn || cauchy.norm() >= radius) {
        step = cauchy.norm() >= radius ? Vector(-(radius / gnorm) * g) : cauchy;
      } else {
        // Largest tau in [0, 1] with |cauchy + tau (gn - cauchy)| = radius.
        const Vector d = *gn - cauchy;
        const double a = d.squaredNorm();
        const double b = 2.0 * cauchy.dot(d);
        const double c = cauchy.squaredNorm() - radius * radius;
        const double tau = (-b + std::sqrt(std::max(b * b - 4.0 * a * c, 0.0))) / (2.0 * a);
        step = cauchy + std::clamp(tau, 0.0, 1.0) * d;
      }
    }

    const Vector z_trial = z + step;
    const Vector F_trial = p.residual(z_trial);
    const double merit_trial = 0.5 * F_trial.squaredNorm();
    const double predicted = merit - 0.5 * (F + J * step).squaredNorm();
    const double actual = merit - merit_trial;
    const double rho = predicted > 0.0 ? actual / predicted : (actual >= 0.0 ? 1.0 : 0.0);
    const double step_norm = step.norm();
    const double inc = p.increment_norm(step);
    rep.steps = k + 1;

    if (rho < 0.25) {
      radius = 0.25 * step_norm;
    } else if (rho > 0.75 && step_norm >= 0.99 * radius) {
      radius = std::min(2.0 * radius, opts.radius_max);
    }

    if (full_gn && inc < cfg.tol) {
      // Gauss-Newton correction below tolerance: converged even if roundoff spoils rho.
      if (merit_trial <= merit) {
        z = z_trial;
        F = F_trial;
        merit = merit_trial;
      }
      rep.increments.push_back(p.history_norm(step));
      rep.converged = true;
      break;
    }
    if (rho > opts.eta && std::isfinite(merit_trial)) {
      z = z_trial;
      F = F_trial;
      merit = merit_trial;
      rep.increments.push_back(p.history_norm(step));
      if (inc < cfg.tol || F.lpNorm<Eigen::Infinity>() <= p.residual_floor(z)) {
        rep.converged = true;
        break;
      }
    }
    if (radius < 1e-14 * std::max(1.0, z.norm())) {
      rep.message = "trust radius collapsed";
      break;
    }
  }
  if (!rep.converged && rep.message.empty()) {
    rep.message = "max_iter reached";
  }
  rep.rate = estimate_order(rep.increments);
  rep.log_rate = estimate_rate(rep.increments);
  rep.final_residual = F.lpNorm<Eigen::Infinity>();
  return {std::move(z), std::move(rep)};
}

SolveResult picard(const DiscreteSystem& sys, const State& x0, const SolverConfig& cfg) {
  validate(cfg);
  const double delta = std::holds_alternative<Picard>(cfg.method) ? std::get<Picard>(cfg.method).delta : 0.0;
  const bool refactor = sys.linearity() == Linearity::Nonlinear && delta > 0.0;
  const auto n = static_cast<Eigen::Index>(sys.field_size());
  auto describe = [&sys](std::size_t k) { return sys.describe(k); };
  // W-solve unknowns sit after the Phi block in the coupled numbering.
  const auto describe_w = [&sys](std::size_t k) { return sys.describe(k + sys.field_size()); };

  SolveReport rep;
  rep.method = "picard";
  State s = x0;
  if (sys.bordered() && s.a.size() != 3) {
    s.a = Vector::Zero(3);
  }

  LinearSolver phi_solver;
  phi_solver.factorize(sys.B_phi(), describe);
  LinearSolver w_solver;
  if (!refactor) {
    w_solver.factorize(sys.picard_w_matrix(s.phi, 0.0), describe_w, sys.border());
  }
  const ShellProblem problem(sys);

  for (int k = 0; k < cfg.max_iter; ++k) {
    const Vector phi_new = phi_solver.solve(sys.picard_phi_rhs(s.w));
    if (refactor) {
      w_solver.factorize(sys.picard_w_matrix(phi_new, delta), describe_w, sys.border());
    }
    const Vector sol = w_solver.solve(sys.picard_w_rhs(phi_new, s.w, delta));
    const Vector w_new = sol.head(n);
    const double dphi = (phi_new - s.phi).lpNorm<Eigen::Infinity>();
    const double dw = (w_new - s.w).lpNorm<Eigen::Infinity>();
    const double inc = dphi + dw;
    s.phi = phi_new;
    s.w = w_new;
    if (sys.bordered()) {
      s.a = sol.tail(3);
    }
    rep.increments.push_back(std::max(dphi, dw));
    rep.steps = k + 1;
    if (!std::isfinite(inc) || inc > kDivergence) {
      rep.message = "diverged";
      break;
    }
    if (inc < cfg.tol) {
      rep.converged = true;
      break;
    }
    const Vector z = sys.pack(s);
    if (sys.residual(z).lpNorm<Eigen::Infinity>() <= problem.residual_floor(z)) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged && rep.message.empty()) {
    rep.message = "max_iter reached";
  }
  rep.rate = estimate_order(rep.increments);
  rep.log_rate = estimate_rate(rep.increments);
  rep.final_residual = sys.residual(sys.pack(s)).lpNorm<Eigen::Infinity>();
  return {std::move(s), std::move(rep)};
}

SolveResult newton(const DiscreteSystem& sys, const State& x0, const SolverConfig& cfg) {
  check_coupled_size(sys, cfg);
  const ShellProblem p(sys);
  return to_state(sys, newton(p, sys.pack(x0), cfg));
}

SolveResult dogleg(const DiscreteSystem& sys, const State& x0, const SolverConfig& cfg) {
  check_coupled_size(sys, cfg);
  const ShellProblem p(sys);
  return to_state(sys, dogleg(p, sys.pack(x0), cfg));
}

SolveResult solve(const DiscreteSystem& sys, const State& x0, const SolverConfig& cfg) {
  return std::visit(overloaded{
                        [&](const Picard&) { return picard(sys, x0, cfg); },
                        [&](const Newton&) { return newton(sys, x0, cfg); },
                        [&](const Dogleg&) { return dogleg(sys, x0, cfg); },
                    },
                    cfg.method);
}

}  // namespace shellsolve
