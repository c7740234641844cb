#include <benchmark/benchmark.h>

#include "shellsolve/mms.hpp"
#include "shellsolve/solvers.hpp"
#include "shellsolve/system.hpp"

using namespace shellsolve;

namespace {

ProblemSpec nonlinear_spec(const BoundaryCondition& bc) {
  return problem_spec(make_case(CaseName::CoupledNonlinear), bc);
}

const BoundaryCondition& bc_arg(int64_t k) {
  static const std::vector<BoundaryCondition> all = all_boundary_conditions();
  return all[static_cast<std::size_t>(k)];
}

void BM_OperatorSet(benchmark::State& st) {
  const Grid g = build_grid(kUnitSquare, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(build_operator_set(g));
}
BENCHMARK(BM_OperatorSet)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& st) {
  const Grid g = build_grid(kUnitSquare, static_cast<int>(st.range(0)));
  const ProblemSpec spec = nonlinear_spec(bc_arg(st.range(1)));
  for (auto _ : st) {
    DiscreteSystem sys(spec, g);
    benchmark::DoNotOptimize(sys.size());
  }
  st.SetLabel(bc_name(bc_arg(st.range(1))));
}
BENCHMARK(BM_Assemble)->ArgsProduct({{40, 80}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_Residual(benchmark::State& st) {
  const DiscreteSystem sys(nonlinear_spec(Clamped{}), build_grid(kUnitSquare, static_cast<int>(st.range(0))));
  const Vector z = sys.pack(sys.initial_guess());
  for (auto _ : st) benchmark::DoNotOptimize(sys.residual(z));
}
BENCHMARK(BM_Residual)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMicrosecond);

void BM_Jacobian(benchmark::State& st) {
  const DiscreteSystem sys(nonlinear_spec(bc_arg(st.range(1))), build_grid(kUnitSquare, static_cast<int>(st.range(0))));
  const Vector z = sys.pack(sys.initial_guess());
  for (auto _ : st) benchmark::DoNotOptimize(sys.jacobian(z));
  st.SetLabel(bc_name(bc_arg(st.range(1))));
}
BENCHMARK(BM_Jacobian)->ArgsProduct({{40, 80}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_Factorize(benchmark::State& st) {
  const DiscreteSystem sys(nonlinear_spec(bc_arg(st.range(1))), build_grid(kUnitSquare, static_cast<int>(st.range(0))));
  const SparseMatrix J = sys.jacobian(sys.pack(sys.initial_guess()));
  for (auto _ : st) {
    LinearSolver s;
    s.factorize(J, {}, sys.border());
    benchmark::DoNotOptimize(s.pivot_ratio());
  }
  st.SetLabel(bc_name(bc_arg(st.range(1))));
}
BENCHMARK(BM_Factorize)->ArgsProduct({{40, 80}, {1, 2}})->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& st) {
  const DiscreteSystem sys(nonlinear_spec(Clamped{}), build_grid(kUnitSquare, static_cast<int>(st.range(0))));
  SolverConfig cfg;
  cfg.method = st.range(1) == 0 ? Method{Newton{}} : Method{Picard{0.0}};
  const State x0 = sys.initial_guess();
  int steps = 0;
  for (auto _ : st) {
    const SolveResult r = solve(sys, x0, cfg);
    steps = r.report.steps;
    benchmark::DoNotOptimize(r.state.w.data());
  }
  st.counters["steps"] = steps;
  st.SetLabel(method_name(cfg.method));
}
BENCHMARK(BM_Solve)->ArgsProduct({{40, 80}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
