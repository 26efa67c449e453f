#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "spheretile/optimize.hpp"

namespace spheretile::detail {

/// Geometry-specific residual provider. eval(x) caches residuals and the
/// extremal sample pairs; the gradient calls refer to that cached state, so
/// the solver always pairs them with the matching x.
class ResidualBackend {
 public:
  virtual ~ResidualBackend() = default;
  virtual int dim() const = 0;
  virtual int ineq_count() const = 0;
  virtual int eq_count() const = 0;
  virtual void eval(const std::vector<double>& x) = 0;
  /// Signed inequality residual (positive = violated).
  virtual double ineq(int i) const = 0;
  /// Signed equality residual (length minus target).
  virtual double eq(int j) const = 0;
  virtual double ineq_weight(int i) const = 0;
  virtual double eq_weight(int j) const = 0;
  /// Accumulate scale * d(residual)/dx into g for the last eval'd x.
  virtual void add_ineq_grad(int i, double scale, std::vector<double>& g) const = 0;
  virtual void add_eq_grad(int j, double scale, std::vector<double>& g) const = 0;
  /// Re-anchor the parametrization at the current positions (x resets to 0).
  virtual void rebase(std::vector<double>& x) = 0;
  /// Rebuild the sampling plan at spacing h from current positions.
  virtual void set_resolution(double h) = 0;
};

struct LbfgsOptions {
  int history = 10;
  int max_iterations = 400;
  double gtol = 1e-10;          ///< stop when the gradient inf-norm drops below
  double ftol = 1e-14;          ///< stop on relative merit stagnation
  std::function<void(int, double)> on_accept;  ///< (iteration, merit)
  std::function<bool()> should_stop;           ///< early exit, checked after accepts
};

struct LbfgsOutcome {
  int iterations = 0;
  bool stalled = false;    ///< line search failed before other stops
  bool exhausted = false;  ///< iteration budget hit
  double value = 0.0;
};

/// Limited-memory BFGS with Armijo backtracking. fg returns the objective and
/// fills the gradient. Deterministic for a given start.
LbfgsOutcome minimize_lbfgs(
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg,
    std::vector<double>& x, const LbfgsOptions& opt);

struct SolveOutcome {
  int iterations = 0;
  bool stalled = false;
  bool exhausted = false;
};

/// Quadratic penalty rounds (multiplier updates on equalities) followed by a
/// smoothed max-violation polish at the fine resolution. Leaves the backend
/// eval'd at the final x.
SolveOutcome run_feasibility_solve(ResidualBackend& backend, const OptimizerConfig& cfg,
                                   std::vector<double>& x);

/// Max violation over the backend's cached residuals.
double max_violation_of(const ResidualBackend& backend);

/// Resolved thread count: cfg override, then SPHERETILE_THREADS, then
/// hardware, clamped to [1, 16].
int resolve_threads(const OptimizerConfig& cfg);

/// Static-partition parallel loop: fn(begin, end) over [0, n) split into
/// contiguous ranges, one per worker. Results must be written to disjoint
/// indexed storage; the partition is a function of (n, threads) only.
void parallel_ranges(int n, int threads, const std::function<void(int, int)>& fn);

/// Spherical residual backend over chart coordinates (two per free vertex),
/// exposed for direct residual/gradient checks.
std::unique_ptr<ResidualBackend> make_sphere_backend(const SphericalTiling& s,
                                                     const ConstraintSet& cs,
                                                     const SymmetryMap* sym, int threads);

}  // namespace spheretile::detail
