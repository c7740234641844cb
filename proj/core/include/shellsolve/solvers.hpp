#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shellsolve/linear_solver.hpp"
#include "shellsolve/system.hpp"

namespace shellsolve {

/// Square nonlinear system F(z) = 0 with an analytic sparse Jacobian.
class NonlinearProblem {
 public:
  virtual ~NonlinearProblem() = default;
  virtual std::size_t size() const = 0;
  virtual Vector residual(const Vector& z) const = 0;
  virtual SparseMatrix jacobian(const Vector& z) const = 0;
  /// Norm used by the stopping test.
  virtual double increment_norm(const Vector& dz) const { return dz.lpNorm<Eigen::Infinity>(); }
  /// Norm recorded in the increment history.
  virtual double history_norm(const Vector& dz) const { return dz.lpNorm<Eigen::Infinity>(); }
  /// Residual level below which z is treated as an exact root (0 disables).
  virtual double residual_floor(const Vector&) const { return 0.0; }
  virtual std::string describe(std::size_t k) const { return "unknown " + std::to_string(k); }
  /// Trailing unknowns that border an otherwise singular Jacobian.
  virtual std::size_t border() const { return 0; }
};

/// The coupled shell system seen as a NonlinearProblem.
class ShellProblem : public NonlinearProblem {
 public:
  explicit ShellProblem(const DiscreteSystem& sys);
  std::size_t size() const override { return sys_.size(); }
  Vector residual(const Vector& z) const override { return sys_.residual(z); }
  SparseMatrix jacobian(const Vector& z) const override { return sys_.jacobian(z); }
  double increment_norm(const Vector& dz) const override { return sys_.increment_norm(dz); }
  double history_norm(const Vector& dz) const override { return sys_.state_change(dz); }
  double residual_floor(const Vector& z) const override;
  std::string describe(std::size_t k) const override { return sys_.describe(k); }
  std::size_t border() const override { return sys_.border(); }

 private:
  const DiscreteSystem& sys_;
  double scale_;
};

struct Picard {
  double delta = 0.0;
};
struct Newton {};
struct Dogleg {
  double radius0 = 1.0;
  double radius_max = 100.0;
  double eta = 0.1;
};
using Method = std::variant<Picard, Newton, Dogleg>;

std::string method_name(const Method& m);
/// "picard", "newton", "dogleg".
Method method_from_name(const std::string& name);

struct SolverConfig {
  Method method = Newton{};
  double tol = 1e-6;
  int max_iter = 100;
  /// Coupled Newton/dogleg solves refuse grids finer than this.
  int max_coupled_N = 320;
};

/// Throws std::invalid_argument on out-of-range parameters.
void validate(const SolverConfig& cfg);

struct SolveReport {
  std::string method;
  bool converged = false;
  int steps = 0;
  /// Per-step ||dX||_inf.
  std::vector<double> increments;
  /// estimate_order of the increment history.
  std::optional<double> rate;
  /// estimate_rate of the increment history.
  std::optional<double> log_rate;
  double final_residual = 0.0;
  std::string message;
};

struct VectorSolveResult {
  Vector z;
  SolveReport report;
};

struct SolveResult {
  State state;
  SolveReport report;
};

/// Mean of ln(e_{k+1}) / ln(e_k) over consecutive increments that both lie in
/// [100 eps, 1). Empty when no such pair exists.
std::optional<double> estimate_rate(const std::vector<double>& increments);

/// Mean of ln(e_{k+1} / e_k) / ln(e_k / e_{k-1}) over consecutive triples
/// that are strictly decreasing with e_{k+1} >= 100 eps: about 1 for linear
/// and 2 for quadratic convergence. Empty when no such triple exists.
std::optional<double> estimate_order(const std::vector<double>& increments);

VectorSolveResult newton(const NonlinearProblem& p, Vector z0, const SolverConfig& cfg);
VectorSolveResult dogleg(const NonlinearProblem& p, Vector z0, const SolverConfig& cfg);

SolveResult picard(const DiscreteSystem& sys, const State& x0, const SolverConfig& cfg);
SolveResult newton(const DiscreteSystem& sys, const State& x0, const SolverConfig& cfg);
SolveResult dogleg(const DiscreteSystem& sys, const State& x0, const SolverConfig& cfg);
/// Dispatches on cfg.method.
SolveResult solve(const DiscreteSystem& sys, const State& x0, const SolverConfig& cfg);

}  // namespace shellsolve
