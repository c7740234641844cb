#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shellsolve/solvers.hpp"
#include "shellsolve/system.hpp"

namespace shellsolve {

/// F(z; xi) = 0 with a scalar parameter xi.
class ParameterizedProblem {
 public:
  virtual ~ParameterizedProblem() = default;
  virtual std::size_t size() const = 0;
  virtual Vector residual(const Vector& z, double xi) const = 0;
  virtual SparseMatrix jacobian(const Vector& z, double xi) const = 0;
  virtual Vector dF_dxi(const Vector& z, double xi) const = 0;
  /// Diagonal weights of the arclength inner product on [z; xi] (length
  /// size() + 1). Zero weights drop unknowns (e.g. multipliers) from the tangent.
  virtual Vector arclength_weights() const { return Vector::Ones(static_cast<Eigen::Index>(size()) + 1); }
  virtual double increment_norm(const Vector& dz) const { return dz.lpNorm<Eigen::Infinity>(); }
  /// Trailing multiplier unknowns of z (see NonlinearProblem::border).
  virtual std::size_t border() const { return 0; }
};

/// The shell system with uniform phi forcing f_phi = xi on top of its data.
class UniformLoadProblem : public ParameterizedProblem {
 public:
  /// Arclength measures xi in units of `xi_scale` and W by its mean square
  /// over physical nodes; Phi and the multipliers carry no weight.
  explicit UniformLoadProblem(const DiscreteSystem& sys, double xi_scale = 1.0);
  std::size_t size() const override { return sys_.size(); }
  Vector residual(const Vector& z, double xi) const override;
  SparseMatrix jacobian(const Vector& z, double) const override { return sys_.jacobian(z); }
  Vector dF_dxi(const Vector&, double) const override { return load_; }
  Vector arclength_weights() const override;
  double increment_norm(const Vector& dz) const override { return sys_.increment_norm(dz); }
  std::size_t border() const override { return sys_.border(); }
  const DiscreteSystem& system() const { return sys_; }

 private:
  const DiscreteSystem& sys_;
  Vector load_;
  double xi_scale_;
};

/// x^2 + xi^2 - 1 = 0, folds at xi = +-1.
class CircleProblem : public ParameterizedProblem {
 public:
  std::size_t size() const override { return 1; }
  Vector residual(const Vector& z, double xi) const override;
  SparseMatrix jacobian(const Vector& z, double xi) const override;
  Vector dF_dxi(const Vector& z, double xi) const override;
};

struct ContinuationPoint {
  Vector z;
  double xi = 0.0;
  double s = 0.0;
  /// Unit (weighted) tangent [z_dot; xi_dot], length size() + 1.
  Vector tangent;
};

struct StepRecord {
  int step = 0;
  double s = 0.0;
  double xi = 0.0;
  double obs1 = 0.0;
  double obs2 = 0.0;
  double tangent_xi = 0.0;
  double ds = 0.0;
  bool accepted = false;
};

struct Fold {
  /// Index of the accepted point nearest the fold.
  std::size_t index = 0;
  double xi = 0.0;
  double s = 0.0;
  double obs1 = 0.0;
  /// True when xi increases into the fold (a local maximum of xi).
  bool xi_max = true;
};

struct ContinuationPath {
  std::vector<ContinuationPoint> points;
  std::vector<Fold> folds;
  std::vector<StepRecord> log;
  bool complete = false;
  std::string diagnostic;
};

struct ContinuationConfig {
  double xi0 = 0.0;
  /// Natural-parameter offset of the second bootstrap point, in arclength
  /// units of xi (see ParameterizedProblem::arclength_weights); its sign sets
  /// the tracing direction.
  double dxi_bootstrap = 1e-2;
  double ds0 = 0.1;
  double ds_min = 1e-6;
  double ds_max = 1.0;
  int max_steps = 400;
  int max_folds = 2;
  /// Accepted steps kept after the last fold when xi never passes the first fold.
  int tail_steps = 20;
  /// Fold location is refined until the tangent xi-component is below this.
  double fold_tol = 1e-10;
  SolverConfig corrector{Newton{}, 1e-8, 25, 320};
};

void validate(const ContinuationConfig& cfg);

using Observables = std::function<std::pair<double, double>(const Vector& z)>;

/// Weighted inner product used for tangents and arclength.
double arclength_dot(const Vector& weights, const Vector& a, const Vector& b);

/// A xi unit that balances the two parts of the arclength: 1 / |dz/dxi|
/// (weighted norm, z-part only) from the linearization at (z0, xi0).
double load_scale(const ParameterizedProblem& p, const Vector& z0, double xi0);

/// Normalized secant from prev to curr, flipped if it points against
/// prev.tangent. Throws std::invalid_argument for a zero secant.
Vector compute_tangent(const ContinuationPoint& prev, const Vector& z, double xi, const Vector& weights);

/// Exact unit tangent at a solution point: the null vector of [J, dF/dxi],
/// oriented like `orient`.
Vector exact_tangent(const ParameterizedProblem& p, const Vector& z, double xi, const Vector& orient);

/// One predictor-corrector step of arclength ds along prev.tangent. Returns
/// nothing when the corrector fails; the caller shrinks ds. The returned
/// point carries prev's tangent; the caller updates it.
std::optional<ContinuationPoint> pac_step(const ParameterizedProblem& p, const ContinuationPoint& prev,
                                          double ds, const SolverConfig& corrector);

/// Traces the branch through z0 (a solution at cfg.xi0), starting toward
/// increasing xi when cfg.dxi_bootstrap > 0.
ContinuationPath trace_branch(const ParameterizedProblem& p, const Vector& z0, const ContinuationConfig& cfg,
                              const Observables& obs);

/// w at the domain centre (bilinear when the centre is not a node).
double center_value(const Grid& g, const Vector& w);
/// sqrt(hx hy sum over physical nodes of w^2).
double l2_norm(const Grid& g, const Vector& w);

/// Snap-through data: f_phi = 0 (the load enters as xi), f_w = 0,
/// w0 = 0.3 (1 - (x - 0.5)^2 - (y - 0.5)^2).
ProblemSpec snap_through_spec(const BoundaryCondition& bc);

/// Solves the unloaded snap-through problem at cfg.xi0 with Newton, scales xi
/// by load_scale there, and traces the branch. Observables are the centre
/// deflection and the L2 norm of w.
ContinuationPath trace_snap_through(const BoundaryCondition& bc, const Grid& g, const ContinuationConfig& cfg);

}  // namespace shellsolve
