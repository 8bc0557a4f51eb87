#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csg/history.hpp"
#include "csg/problem.hpp"
#include "csg/random.hpp"
#include "csg/schedule.hpp"
#include "csg/weights.hpp"

namespace csg {

/// d/du max{0, u}, taking 0 at the kink.
double subgradient_max0(double u);

/// ||Proj(theta - t g) - theta||_2. Zero exactly when theta is a first-order
/// stationary point for the direction g. Throws InvalidInput unless t > 0.
double stationarity_measure(std::span<const double> theta, std::span<const double> g, double t, const BoxDomain& box);

struct StoppingRule {
  std::size_t max_iters = 1000;
  /// Stop once the stationarity measure of a step is at most this value.
  std::optional<double> stationarity_tol;
  double stationarity_t = 1.0;

  void validate() const;
};

struct StepOptions {
  NeighborSearch search = NeighborSearch::indexed;
  /// Measure the wall time of each weight computation. Off by default so that
  /// traces are reproducible byte for byte.
  bool record_timing = false;
};

/// Everything the CSG iteration carries from one step to the next.
struct CsgState {
  /// Completed steps (= gradient evaluations so far).
  std::size_t n = 0;
  Design theta;
  History history{1, 1};
  /// Outer-argument history of a composed objective with a random outer argument.
  std::optional<History> y_history;
  std::vector<double> ghat;
  double jhat = std::numeric_limits<double>::quiet_NaN();
  /// Search direction of the last step (ghat for plain problems).
  std::vector<double> direction;
  WeightVector weights;
  WeightVector y_weights;
  Rng rng;
  std::size_t grad_evals = 0;
  std::size_t sample_draws = 0;
  std::int64_t weight_time_ns = 0;
};

CsgState make_csg_state(const Problem& problem, const Design& theta0, Rng rng);
CsgState make_csg_state(const ComposedObjective& composed, const Design& theta0, Rng rng);

/// One CSG iteration: draw the new sample (and, for inexact hybrid, the pool
/// growth), evaluate j and its gradient at the current design, recompute the
/// weights, aggregate G^ and J^, and take the projected step with tau_{n+1}.
void csg_step(CsgState& state, const Problem& problem, const WeightStrategy& strategy, const StepSchedule& schedule,
              const JointMetric& metric, const StepOptions& options = {});
/// Same with an explicit step length (tau >= 0).
void csg_step(CsgState& state, const Problem& problem, const WeightStrategy& strategy, double tau,
              const JointMetric& metric, const StepOptions& options = {});

/// CSG for a composed objective. The inner aggregates J^ and G^ come from the
/// X-history; the outer expectation is weighted by a second weight vector of
/// the same strategy over the (theta, y) history.
void csg_step_composed(CsgState& state, const ComposedObjective& composed, const WeightStrategy& strategy,
                       const StepSchedule& schedule, const JointMetric& metric, const StepOptions& options = {});
void csg_step_composed(CsgState& state, const ComposedObjective& composed, const WeightStrategy& strategy, double tau,
                       const JointMetric& metric, const StepOptions& options = {});

/// sum_l a_l d_u f(y_l, jhat) ghat + sum_l a_l d_theta f(theta, y_l, jhat).
/// Without a y-history (y_weights null) the outer callbacks get an empty y.
std::vector<double> composed_direction(const ComposedObjective& composed, std::span<const double> theta,
                                       const History* y_history, const WeightVector* y_weights, double jhat,
                                       std::span<const double> ghat);

/// One trace row. Row 0 holds the starting point; row n >= 1 describes step n:
/// theta is the iterate after the step, the other diagnostics are evaluated at
/// the design where the step's gradient was sampled.
struct TraceRow {
  std::size_t iteration = 0;
  std::vector<double> theta;
  /// ||theta - theta*||_2, NaN without a known optimum.
  double abs_error = std::numeric_limits<double>::quiet_NaN();
  double jhat = std::numeric_limits<double>::quiet_NaN();
  double stationarity = std::numeric_limits<double>::quiet_NaN();
  /// ||direction - grad J||_2, NaN without an analytic gradient.
  double grad_error = std::numeric_limits<double>::quiet_NaN();
  /// |J^ - E_X[j]|, NaN without an analytic inner objective.
  double obj_error = std::numeric_limits<double>::quiet_NaN();
  std::size_t grad_evals = 0;
  std::size_t sample_draws = 0;
  std::int64_t weight_time_ns = 0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  /// Set when a step raised an error; rows hold everything before it.
  std::optional<std::string> failure;

  bool ok() const { return !failure.has_value(); }
};

/// Called after every step; lets tests inspect the full state.
using StepObserver = std::function<void(const CsgState&)>;

RunTrace run_csg(const Problem& problem, const Design& theta0, const WeightStrategy& strategy,
                 const StepSchedule& schedule, const JointMetric& metric, const StoppingRule& stop, Rng rng,
                 const StepOptions& options = {}, const StepObserver& observer = {});
RunTrace run_csg(const ComposedObjective& composed, const Design& theta0, const WeightStrategy& strategy,
                 const StepSchedule& schedule, const JointMetric& metric, const StoppingRule& stop, Rng rng,
                 const StepOptions& options = {}, const StepObserver& observer = {});

/// Seeded convenience form: the start is drawn uniformly from the problem domain.
RunTrace run_csg(const Problem& problem, const WeightStrategy& strategy, const StepSchedule& schedule,
                 const JointMetric& metric, const StoppingRule& stop, std::uint64_t seed);

}  // namespace csg
