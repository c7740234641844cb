#include "shellsolve/mms.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

namespace shellsolve {

namespace {

constexpr double kErrorFloor = 1e-13;

JetField sin_power(const Bounds& b, int px, int py) {
  return [b, px, py](const Jet& x, const Jet& y) {
    const double two_pi = 2.0 * std::numbers::pi;
    const Jet sx = sin(two_pi * (x - b.x_a) / (b.x_b - b.x_a));
    const Jet sy = sin(two_pi * (y - b.y_a) / (b.y_b - b.y_a));
    return pow(sx, px) * pow(sy, py);
  };
}

JetField poly_solution(const Bounds& b) {
  return [b](const Jet& x, const Jet& y) {
    const double xc = 0.5 * (b.x_a + b.x_b), yc = 0.5 * (b.y_a + b.y_b);
    const double lx = (b.x_b - b.x_a) / 3.0, ly = (b.y_b - b.y_a) / 3.0;
    const Jet px = (x - xc) * (x - b.x_a) * (x - b.x_b);
    const Jet py = (y - yc) * (y - b.y_a) * (y - b.y_b);
    return pow(px * py / (lx * lx * lx * ly * ly * ly), 7) / 100.0;
  };
}

Jet eval(const JetField& f, double x, double y) { return f ? f(Jet::x(x), Jet::y(y)) : Jet(0.0); }

}  // namespace

std::string case_name(CaseName c) {
  switch (c) {
    case CaseName::BiharmTrig: return "biharm-trig";
    case CaseName::BiharmPoly: return "biharm-poly";
    case CaseName::CoupledLinear: return "coupled-linear";
    case CaseName::CoupledNonlinear: return "coupled-nonlinear";
    case CaseName::LocalizedThermal: return "localized-thermal";
  }
  return "?";
}

CaseName case_from_name(const std::string& name) {
  for (CaseName c : {CaseName::BiharmTrig, CaseName::BiharmPoly, CaseName::CoupledLinear,
                     CaseName::CoupledNonlinear, CaseName::LocalizedThermal}) {
    if (case_name(c) == name) return c;
  }
  throw std::invalid_argument("unknown manufactured case '" + name + "'");
}

ManufacturedCase make_case(CaseName name, Bounds bounds) {
  ManufacturedCase c;
  c.name = name;
  c.bounds = bounds;
  switch (name) {
    case CaseName::BiharmTrig:
      c.biharmonic_only = true;
      c.w_e = sin_power(bounds, 4, 4);
      break;
    case CaseName::BiharmPoly:
      c.biharmonic_only = true;
      c.w_e = poly_solution(bounds);
      break;
    case CaseName::CoupledLinear:
    case CaseName::CoupledNonlinear:
      c.linearity = name == CaseName::CoupledLinear ? Linearity::Linear : Linearity::Nonlinear;
      c.phi_e = sin_power(bounds, 5, 5);
      c.w_e = sin_power(bounds, 4, 4);
      c.w0 = sin_power(bounds, 1, 1);
      break;
    case CaseName::LocalizedThermal:
      c.linearity = Linearity::Nonlinear;
      c.w0 = [](const Jet&, const Jet& y) { return 0.1 - 0.4 * (y - 0.5) * (y - 0.5); };
      c.f_phi_given = [](double x, double y) {
        return 32634.2 * std::max(-100.0 * ((x - 0.75) * (x - 0.75) + (y - 0.25) * (y - 0.25)) + 1.0, 0.0);
      };
      c.f_w_given = [](double, double) { return 0.0; };
      break;
  }
  return c;
}

ScalarField to_scalar(const JetField& f) {
  if (!f) return {};
  return [f](double x, double y) { return f(Jet(x), Jet(y)).value(); };
}

Forcing synthesize_forcing(const ManufacturedCase& c) {
  if (!c.has_exact()) {
    return {c.f_phi_given, c.f_w_given};
  }
  Forcing out;
  if (c.biharmonic_only) {
    out.f_phi = [](double, double) { return 0.0; };
    out.f_w = [f = c.w_e](double x, double y) { return eval(f, x, y).biharmonic(); };
    return out;
  }
  const bool nonlinear = c.linearity == Linearity::Nonlinear;
  out.f_phi = [c, nonlinear](double x, double y) {
    const Jet phi = eval(c.phi_e, x, y), w = eval(c.w_e, x, y), w0 = eval(c.w0, x, y);
    double f = -phi.biharmonic() - bilinear_L(w0, w);
    if (nonlinear) f -= 0.5 * bilinear_L(w, w);
    return f;
  };
  out.f_w = [c, nonlinear](double x, double y) {
    const Jet phi = eval(c.phi_e, x, y), w = eval(c.w_e, x, y), w0 = eval(c.w0, x, y);
    double f = w.biharmonic() - bilinear_L(w0, phi);
    if (nonlinear) f -= bilinear_L(w, phi);
    return f;
  };
  return out;
}

ProblemSpec problem_spec(const ManufacturedCase& c, const BoundaryCondition& bc) {
  const Forcing f = synthesize_forcing(c);
  ProblemSpec spec;
  spec.w0 = to_scalar(c.w0);
  spec.f_phi = f.f_phi;
  spec.f_w = f.f_w;
  spec.bc = bc;
  spec.linearity = c.linearity;
  return spec;
}

ErrorNorms error_norms(const Vector& numeric, const Vector& exact, const Grid& g) {
  ErrorNorms e;
  double sum = 0.0;
  for (int j = 0; j <= g.N(); ++j) {
    for (int i = 0; i <= g.N(); ++i) {
      const auto k = static_cast<Eigen::Index>(g.flat(i, j));
      const double d = exact[k] - numeric[k];
      e.linf = std::max(e.linf, std::abs(d));
      sum += d * d;
    }
  }
  e.l2 = std::sqrt(g.hx() * g.hy() * sum);
  return e;
}

ErrorNorms error_norms(const Vector& numeric, const ScalarField& exact, const Grid& g) {
  return error_norms(numeric, sample(exact, g).values, g);
}

Vector remove_plane_component(const Vector& u, const Grid& g) {
  const Eigen::MatrixXd Q = Eigen::MatrixXd(plane_basis(g));
  const Eigen::Vector3d coef = (Q.transpose() * Q).ldlt().solve(Q.transpose() * u);
  return u - Q * coef;
}

CaseSolution solve_case(const ManufacturedCase& c, const BoundaryCondition& bc, int N, const SolverConfig& cfg) {
  const Grid g = build_grid(c.bounds, N);
  const ProblemSpec spec = problem_spec(c, bc);
  CaseSolution out{g, {}, {}, {}, {}};

  if (c.biharmonic_only) {
    const OperatorSet ops = build_operator_set(g);
    const SparseMatrix B = field_matrix(ops, bc, Field::W);
    const Vector rhs = pde_mask(g).cwiseProduct(sample(spec.f_w, g).values);
    out.state.phi = Vector::Zero(static_cast<Eigen::Index>(g.size()));
    if (has_plane_null_space(bc, Field::W)) {
      AugmentedSolution a = regularize_free(B, rhs, g);
      out.state.w = std::move(a.w);
      out.state.a = std::move(a.a);
    } else {
      out.state.w = linear_solve(B, rhs);
    }
    out.report.method = "direct";
    out.report.converged = true;
    out.report.steps = 1;
    out.report.final_residual = (B * out.state.w - rhs).lpNorm<Eigen::Infinity>();
  } else {
    const DiscreteSystem sys(spec, g);
    const SolveResult r = solve(sys, sys.initial_guess(), cfg);
    out.state = r.state;
    out.report = r.report;
  }

  if (c.has_exact()) {
    Vector w_exact = sample(to_scalar(c.w_e), g).values;
    if (has_plane_null_space(bc, Field::W)) {
      w_exact = remove_plane_component(w_exact, g);
    }
    out.err_w = error_norms(out.state.w, w_exact, g);
    if (c.phi_e) {
      out.err_phi = error_norms(out.state.phi, to_scalar(c.phi_e), g);
    }
  }
  return out;
}

std::optional<double> observed_order(double e1, double e2, double h1, double h2) {
  if (!(e1 > kErrorFloor && e2 > kErrorFloor)) return std::nullopt;
  return std::log(e1 / e2) / std::log(h1 / h2);
}

RefinementTable refinement_study(const ManufacturedCase& c, const BoundaryCondition& bc, const SolverConfig& cfg,
                                 const std::vector<int>& Ns, int jobs) {
  RefinementTable table;
  table.rows.resize(Ns.size());
  const std::string solver = c.biharmonic_only ? "direct" : method_name(cfg.method);

  auto run = [&](std::size_t k) {
    RefinementRow& row = table.rows[k];
    row.N = Ns[k];
    row.h = std::min((c.bounds.x_b - c.bounds.x_a), (c.bounds.y_b - c.bounds.y_a)) / Ns[k];
    row.solver = solver;
    row.bc = bc_name(bc);
    try {
      const CaseSolution s = solve_case(c, bc, Ns[k], cfg);
      row.err_phi = s.err_phi.linf;
      row.err_w = s.err_w.linf;
      row.steps = s.report.steps;
      row.converged = s.report.converged;
      row.message = s.report.message;
    } catch (const std::exception& e) {
      row.converged = false;
      row.message = e.what();
      row.err_phi = row.err_w = std::numeric_limits<double>::quiet_NaN();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, Ns.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < Ns.size(); ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < Ns.size(); k = next++) run(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    RefinementRow& r = table.rows[k];
    const RefinementRow& p = table.rows[k - 1];
    if (r.converged && p.converged) {
      r.order_phi = c.phi_e ? observed_order(p.err_phi, r.err_phi, p.h, r.h) : std::nullopt;
      r.order_w = observed_order(p.err_w, r.err_w, p.h, r.h);
    }
  }
  return table;
}

}  // namespace shellsolve
