#include "app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <thread>

#include "app/acceptance.hpp"
#include "app/csv.hpp"
#include "shellsolve/mms.hpp"

namespace shellsolve::app {

namespace {

std::ostream& log_of(const RunContext& ctx) { return ctx.log ? *ctx.log : std::cout; }

// Runs fn(0..n-1) on up to `jobs` threads; results go into caller-owned slots.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

std::string out_path(const RunContext& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

bool in_band(const std::optional<double>& v, const ExperimentConfig& cfg) {
  return v && *v >= cfg.order_min && *v <= cfg.order_max;
}

void write_refine_plot(const std::string& path, const std::string& csv) {
  std::ofstream os(path, std::ios::binary);
  os << "set datafile separator ','\nset logscale xy\nset key top left\n"
     << "set xlabel 'h'\nset ylabel 'max error'\n"
     << "plot '" << csv << "' every ::1 using 2:4 with linespoints title 'w', \\\n"
     << "     '" << csv << "' every ::1 using 2:3 with linespoints title 'phi'\n";
}

void write_continue_plot(const std::string& path, const std::vector<std::string>& csvs,
                         const std::vector<std::string>& names) {
  std::ofstream os(path, std::ios::binary);
  os << "set datafile separator ','\nset xlabel 'xi'\nset ylabel 'w at centre'\nplot ";
  for (std::size_t k = 0; k < csvs.size(); ++k) {
    os << (k ? ", \\\n     " : "") << "'" << csvs[k] << "' every ::1 using 3:($8==1?$4:1/0) with linespoints title '"
       << names[k] << "'";
  }
  os << '\n';
}

State solve_snap_point(const ExperimentConfig& cfg, const BoundaryCondition& bc, const Grid& g, SolveReport& report) {
  ProblemSpec spec = snap_through_spec(bc);
  const double xi = cfg.xi;
  spec.f_phi = [xi](double, double) { return xi; };
  const DiscreteSystem sys(spec, g);
  SolveResult r = solve(sys, sys.initial_guess(), cfg.solver);
  report = r.report;
  return r.state;
}

}  // namespace

int cmd_refine(const ExperimentConfig& cfg, const RunContext& ctx) {
  if (cfg.preset == "snap-through") throw ConfigError("refine needs a preset with an exact solution");
  const ManufacturedCase mc = make_case(case_from_name(cfg.preset), cfg.bounds);
  if (!mc.has_exact()) throw ConfigError("refine needs a preset with an exact solution; '" + cfg.preset + "' has none");

  const auto bcs = cfg.boundary_conditions();
  std::vector<RefinementTable> tables(bcs.size());
  if (bcs.size() == 1) {
    tables[0] = refinement_study(mc, bcs[0], cfg.solver, cfg.ladder, ctx.jobs);
  } else {
    parallel_for(bcs.size(), ctx.jobs,
                 [&](std::size_t k) { tables[k] = refinement_study(mc, bcs[k], cfg.solver, cfg.ladder, 1); });
  }

  std::ostream& out = log_of(ctx);
  bool all_converged = true;
  bool all_in_band = true;
  for (std::size_t b = 0; b < bcs.size(); ++b) {
    const RefinementTable& t = tables[b];
    const std::string solver = t.rows.front().solver;
    std::vector<std::vector<std::string>> rows;
    out << cfg.preset << " / " << bc_name(bcs[b]) << " / " << solver << '\n';
    for (const RefinementRow& r : t.rows) {
      rows.push_back({std::to_string(r.N), fmt(r.h), fmt(r.err_phi), fmt(r.err_w), fmt(r.order_phi), fmt(r.order_w),
                      r.solver, r.bc, std::to_string(r.steps), r.converged ? "true" : "false"});
      out << "  N=" << r.N << " err_w=" << fmt(r.err_w);
      if (mc.phi_e) out << " err_phi=" << fmt(r.err_phi);
      if (r.order_w) out << " order_w=" << fmt(*r.order_w);
      if (r.order_phi) out << " order_phi=" << fmt(*r.order_phi);
      if (!r.converged) out << " NOT CONVERGED: " << r.message;
      out << '\n';
      all_converged = all_converged && r.converged;
    }
    // The band applies to the finest pair.
    const RefinementRow& last = t.rows.back();
    if (t.rows.size() >= 2) {
      const bool ok = in_band(last.order_w, cfg) && (!mc.phi_e || in_band(last.order_phi, cfg));
      out << "  finest-pair orders in [" << fmt(cfg.order_min) << ", " << fmt(cfg.order_max)
          << "]: " << (ok ? "PASS" : "FAIL") << '\n';
      all_in_band = all_in_band && ok;
    }
    const std::string stem = "refine_" + cfg.preset + "_" + bc_name(bcs[b]) + "_" + solver;
    write_csv(out_path(ctx, stem + ".csv"),
              {"N", "h", "err_phi_Linf", "err_w_Linf", "order_phi", "order_w", "solver", "bc", "steps", "converged"},
              rows);
    if (cfg.gnuplot) write_refine_plot(out_path(ctx, stem + ".gp"), stem + ".csv");
  }
  if (!all_converged) return kNonConvergence;
  return all_in_band ? kOk : kCheckFailed;
}

int cmd_solve(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto bcs = cfg.boundary_conditions();
  const Grid g = build_grid(cfg.bounds, cfg.N);
  struct Outcome {
    State state;
    SolveReport report;
    std::optional<double> err_phi, err_w;
    ScalarField w0;
    std::string error;
  };
  std::vector<Outcome> results(bcs.size());
  parallel_for(bcs.size(), ctx.jobs, [&](std::size_t k) {
    Outcome& o = results[k];
    try {
      if (cfg.preset == "snap-through") {
        o.state = solve_snap_point(cfg, bcs[k], g, o.report);
        o.w0 = snap_through_spec(bcs[k]).w0;
      } else {
        const ManufacturedCase mc = make_case(case_from_name(cfg.preset), cfg.bounds);
        CaseSolution s = solve_case(mc, bcs[k], cfg.N, cfg.solver);
        o.state = std::move(s.state);
        o.report = std::move(s.report);
        if (mc.has_exact()) {
          o.err_phi = s.err_phi.linf;
          o.err_w = s.err_w.linf;
        }
        o.w0 = to_scalar(mc.w0);
      }
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });

  std::ostream& out = log_of(ctx);
  int code = kOk;
  for (std::size_t k = 0; k < bcs.size(); ++k) {
    const Outcome& o = results[k];
    const std::string stem = "solve_" + cfg.preset + "_" + bc_name(bcs[k]);
    if (!o.error.empty()) {
      out << bc_name(bcs[k]) << ": failed: " << o.error << '\n';
      write_csv(out_path(ctx, stem + "_report.csv"),
                {"preset", "bc", "N", "solver", "converged", "steps", "rate", "final_residual", "err_phi_Linf",
                 "err_w_Linf", "w_Linf", "message"},
                {{cfg.preset, bc_name(bcs[k]), std::to_string(cfg.N), method_name(cfg.solver.method), "false", "0", "",
                  "", "", "", "", quote(o.error)}});
      code = kNonConvergence;
      continue;
    }
    std::vector<std::vector<std::string>> field_rows;
    double w_linf = 0.0;
    for (int j = 0; j <= cfg.N; ++j) {
      for (int i = 0; i <= cfg.N; ++i) {
        const auto f = static_cast<Eigen::Index>(g.flat(i, j));
        const double x = g.x(i), y = g.y(j);
        const double w = o.state.w[f], phi = o.state.phi[f];
        w_linf = std::max(w_linf, std::abs(w));
        field_rows.push_back({fmt(x), fmt(y), fmt(w), fmt(phi), fmt(w + (o.w0 ? o.w0(x, y) : 0.0))});
      }
    }
    write_csv(out_path(ctx, stem + "_fields.csv"), {"x", "y", "w", "phi", "w_plus_w0"}, field_rows);
    const SolveReport& r = o.report;
    write_csv(out_path(ctx, stem + "_report.csv"),
              {"preset", "bc", "N", "solver", "converged", "steps", "rate", "final_residual", "err_phi_Linf",
               "err_w_Linf", "w_Linf", "message"},
              {{cfg.preset, bc_name(bcs[k]), std::to_string(cfg.N), r.method, r.converged ? "true" : "false",
                std::to_string(r.steps), fmt(r.rate), fmt(r.final_residual), fmt(o.err_phi), fmt(o.err_w),
                fmt(w_linf), quote(r.message)}});
    out << bc_name(bcs[k]) << ": " << (r.converged ? "converged" : "NOT converged") << " in " << r.steps
        << " steps, |w|_inf=" << fmt(w_linf);
    if (r.rate) out << ", rate=" << fmt(*r.rate);
    out << '\n';
    if (!r.converged) code = kNonConvergence;
  }
  return code;
}

int cmd_continue(const ExperimentConfig& cfg, const RunContext& ctx) {
  if (cfg.preset != "snap-through") throw ConfigError("continue needs problem.preset = snap-through");
  const auto bcs = cfg.boundary_conditions();
  const Grid g = build_grid(cfg.bounds, cfg.N);
  std::vector<ContinuationPath> paths(bcs.size());
  parallel_for(bcs.size(), ctx.jobs, [&](std::size_t k) {
    try {
      paths[k] = trace_snap_through(bcs[k], g, cfg.continuation);
    } catch (const std::exception& e) {
      paths[k].diagnostic = e.what();
    }
  });

  std::ostream& out = log_of(ctx);
  int code = kOk;
  std::vector<std::string> csvs, names;
  for (std::size_t k = 0; k < bcs.size(); ++k) {
    const ContinuationPath& p = paths[k];
    const std::string name = bc_name(bcs[k]);
    const std::string stem = "continue_" + name;
    std::vector<std::vector<std::string>> rows;
    for (const StepRecord& s : p.log) {
      rows.push_back({std::to_string(s.step), fmt(s.s), fmt(s.xi), fmt(s.obs1), fmt(s.obs2), fmt(s.tangent_xi),
                      fmt(s.ds), s.accepted ? "1" : "0"});
    }
    write_csv(out_path(ctx, stem + "_path.csv"),
              {"step", "s", "xi", "w_center", "w_L2", "tangent_xi", "ds", "accepted"}, rows);
    std::vector<std::vector<std::string>> fold_rows;
    for (const Fold& f : p.folds) fold_rows.push_back({std::to_string(f.index), fmt(f.xi), fmt(f.obs1)});
    write_csv(out_path(ctx, stem + "_folds.csv"), {"fold_index", "xi_fold", "w_center_at_fold"}, fold_rows);
    csvs.push_back(stem + "_path.csv");
    names.push_back(name);

    out << name << ": " << p.folds.size() << " fold(s)";
    for (const Fold& f : p.folds) out << " xi=" << fmt(f.xi);
    if (!p.complete) {
      out << " [partial: " << p.diagnostic << "]";
      code = kPartialPath;
    }
    out << '\n';
  }
  if (cfg.gnuplot) write_continue_plot(out_path(ctx, "continue.gp"), csvs, names);

  if (bcs.size() == 5) {
    const std::vector<std::string> order{"clamped", "cf", "cs", "free", "supported"};
    std::vector<double> crit;
    for (const auto& want : order) {
      for (std::size_t k = 0; k < bcs.size(); ++k) {
        if (names[k] == want && !paths[k].folds.empty()) crit.push_back(paths[k].folds.front().xi);
      }
    }
    const bool ok = crit.size() == order.size() && std::is_sorted(crit.begin(), crit.end()) &&
                    std::adjacent_find(crit.begin(), crit.end()) == crit.end();
    out << "clamped < cf < cs < free < supported: " << (ok ? "PASS" : "FAIL") << '\n';
  }
  return code;
}

int cmd_paper_suite(const ExperimentConfig&, const RunContext& ctx) {
  SuiteOptions opt;
  opt.jobs = ctx.jobs;
  opt.log = &log_of(ctx);
  std::vector<std::vector<std::string>> rows;
  bool all = true;
  for (int id : criterion_ids()) {
    const CriterionResult r = run_criterion(id, opt);
    *opt.log << format_result(r) << std::flush;
    std::string detail;
    for (const auto& d : r.details) detail += (detail.empty() ? "" : "; ") + d;
    rows.push_back({std::to_string(r.id), quote(r.title), r.pass ? "PASS" : "FAIL", fmt(r.seconds), quote(detail)});
    all = all && r.pass;
  }
  write_csv(out_path(ctx, "paper_suite.csv"), {"criterion", "title", "result", "seconds", "detail"}, rows);
  return all ? kOk : kCheckFailed;
}

}  // namespace shellsolve::app
