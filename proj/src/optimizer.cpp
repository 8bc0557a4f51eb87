#include "csg/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "trace_rows.hpp"

namespace csg {

double subgradient_max0(double u) { return u > 0.0 ? 1.0 : 0.0; }

double stationarity_measure(std::span<const double> theta, std::span<const double> g, double t,
                            const BoxDomain& box) {
  if (!(t > 0.0)) throw InvalidInput("stationarity_measure: t must be > 0");
  if (theta.size() != g.size() || theta.size() != box.dimension()) {
    throw InvalidInput("stationarity_measure: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double p = std::clamp(theta[i] - t * g[i], box.lower()[i], box.upper()[i]);
    s += (p - theta[i]) * (p - theta[i]);
  }
  return std::sqrt(s);
}

void StoppingRule::validate() const {
  if (!(stationarity_t > 0.0)) throw ConfigError("StoppingRule: stationarity_t must be > 0");
  if (stationarity_tol && !(*stationarity_tol >= 0.0)) throw ConfigError("StoppingRule: tolerance must be >= 0");
}

namespace {

void require_finite(std::span<const double> v, double jval, std::size_t n) {
  bool ok = std::isfinite(jval);
  for (double g : v) ok = ok && std::isfinite(g);
  if (!ok) throw NumericError("non-finite objective or gradient sample at iteration " + std::to_string(n));
}

/// Draws the pool growth of step n into `hist`; returns the index of the first
/// new sample, which is the step's evaluation sample.
std::size_t grow_pool(History& hist, const Distribution& dist, const WeightStrategy& strategy, std::size_t n,
                      Rng& rng, std::size_t& draws) {
  const std::size_t count = strategy.pool_target(n) - strategy.pool_target(n - 1);
  std::vector<Sample> batch;
  batch.reserve(count);
  for (std::size_t i = 0; i < count; ++i) batch.push_back(dist.sample(rng));
  draws += count;
  return hist.append_pool_samples(batch);
}

WeightVector weights_for(const WeightStrategy& strategy, const History& hist, const JointMetric& metric,
                         std::span<const double> theta, const Distribution& dist, const StepOptions& options,
                         std::int64_t& elapsed_ns) {
  if (!options.record_timing) return compute_weights(strategy, hist, metric, theta, &dist, options.search);
  const auto start = std::chrono::steady_clock::now();
  WeightVector w = compute_weights(strategy, hist, metric, theta, &dist, options.search);
  elapsed_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
  return w;
}

/// Sampling, evaluation and aggregation shared by the plain and composed steps.
void update_inner(CsgState& st, const Problem& problem, const WeightStrategy& strategy, const JointMetric& metric,
                  const StepOptions& options) {
  const std::size_t n = st.n + 1;
  const std::size_t idx = grow_pool(st.history, problem.dist, strategy, n, st.rng, st.sample_draws);
  const auto x = st.history.pool_sample(idx);
  const double jv = problem.j(st.theta.view(), x);
  const std::vector<double> g = problem.grad_j(st.theta.view(), x);
  if (g.size() != problem.d_des) throw InvalidInput("gradient sample has the wrong length");
  require_finite(g, jv, n);
  st.history.append_record(st.theta.view(), idx, g, jv);
  ++st.grad_evals;

  st.weight_time_ns = 0;
  st.weights = weights_for(strategy, st.history, metric, st.theta.view(), problem.dist, options, st.weight_time_ns);

  st.ghat.assign(problem.d_des, 0.0);
  st.jhat = 0.0;
  for (std::size_t k = 0; k < st.history.size(); ++k) {
    const double a = st.weights[k];
    const auto gk = st.history.grad(k);
    for (std::size_t i = 0; i < gk.size(); ++i) st.ghat[i] += a * gk[i];
    st.jhat += a * st.history.jval(k);
  }
}

void take_step(CsgState& st, const BoxDomain& box, double tau) {
  if (!(std::isfinite(tau) && tau >= 0.0)) throw InvalidInput("csg_step: step length must be finite and >= 0");
  std::vector<double> v(st.theta.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = st.theta[i] - tau * st.direction[i];
  st.theta = project_box(box, v);
  ++st.n;
}

void check_start(const BoxDomain& box, const Design& theta0) {
  if (theta0.size() != box.dimension()) throw InvalidInput("start point has the wrong dimension");
  if (!box.contains(theta0.view())) throw InvalidInput("start point lies outside the design domain");
}

}  // namespace

CsgState make_csg_state(const Problem& problem, const Design& theta0, Rng rng) {
  problem.validate();
  check_start(problem.domain, theta0);
  CsgState st;
  st.theta = theta0;
  st.history = History(problem.d_des, problem.d_par);
  st.rng = std::move(rng);
  return st;
}

CsgState make_csg_state(const ComposedObjective& composed, const Design& theta0, Rng rng) {
  composed.validate();
  CsgState st = make_csg_state(composed.inner, theta0, std::move(rng));
  if (composed.y_dist) st.y_history.emplace(composed.inner.d_des, composed.d_y());
  return st;
}

void csg_step(CsgState& state, const Problem& problem, const WeightStrategy& strategy, double tau,
              const JointMetric& metric, const StepOptions& options) {
  update_inner(state, problem, strategy, metric, options);
  state.direction = state.ghat;
  take_step(state, problem.domain, tau);
}

void csg_step(CsgState& state, const Problem& problem, const WeightStrategy& strategy, const StepSchedule& schedule,
              const JointMetric& metric, const StepOptions& options) {
  csg_step(state, problem, strategy, schedule.step(state.n + 1), metric, options);
}

std::vector<double> composed_direction(const ComposedObjective& composed, std::span<const double> theta,
                                       const History* y_history, const WeightVector* y_weights, double jhat,
                                       std::span<const double> ghat) {
  std::vector<double> dir(ghat.size(), 0.0);
  double coef = 0.0;
  auto add_theta_part = [&](std::span<const double> y, double a) {
    if (!composed.outer_partial_theta) return;
    const auto pt = composed.outer_partial_theta(theta, y, jhat);
    if (pt.size() != dir.size()) throw InvalidInput("outer_partial_theta returned the wrong length");
    for (std::size_t i = 0; i < dir.size(); ++i) dir[i] += a * pt[i];
  };
  if (y_history != nullptr && y_weights != nullptr) {
    for (std::size_t l = 0; l < y_history->size(); ++l) {
      const double a = (*y_weights)[l];
      if (a == 0.0) continue;
      const auto y = y_history->x(l);
      coef += a * composed.outer_partial_u(y, jhat);
      add_theta_part(y, a);
    }
  } else {
    coef = composed.outer_partial_u({}, jhat);
    add_theta_part({}, 1.0);
  }
  for (std::size_t i = 0; i < dir.size(); ++i) dir[i] += coef * ghat[i];
  return dir;
}

void csg_step_composed(CsgState& state, const ComposedObjective& composed, const WeightStrategy& strategy, double tau,
                       const JointMetric& metric, const StepOptions& options) {
  update_inner(state, composed.inner, strategy, metric, options);
  if (composed.y_dist) {
    if (!state.y_history) throw InvalidState("csg_step_composed: state was not created for this objective");
    History& yh = *state.y_history;
    const std::size_t idx = grow_pool(yh, *composed.y_dist, strategy, state.n + 1, state.rng, state.sample_draws);
    const std::vector<double> zero(composed.inner.d_des, 0.0);
    yh.append_record(state.theta.view(), idx, zero, 0.0);
    state.y_weights =
        weights_for(strategy, yh, metric, state.theta.view(), *composed.y_dist, options, state.weight_time_ns);
    state.direction =
        composed_direction(composed, state.theta.view(), &yh, &state.y_weights, state.jhat, state.ghat);
  } else {
    state.direction = composed_direction(composed, state.theta.view(), nullptr, nullptr, state.jhat, state.ghat);
  }
  for (double d : state.direction) {
    if (!std::isfinite(d)) {
      throw NumericError("non-finite search direction at iteration " + std::to_string(state.n + 1));
    }
  }
  take_step(state, composed.inner.domain, tau);
}

void csg_step_composed(CsgState& state, const ComposedObjective& composed, const WeightStrategy& strategy,
                       const StepSchedule& schedule, const JointMetric& metric, const StepOptions& options) {
  csg_step_composed(state, composed, strategy, schedule.step(state.n + 1), metric, options);
}

namespace {

template <class StepFn>
RunTrace drive(CsgState& st, const detail::Diagnostics& diag, const StoppingRule& stop, StepFn&& step,
               const StepObserver& observer) {
  RunTrace trace;
  trace.rows.reserve(stop.max_iters + 1);
  trace.rows.push_back(detail::initial_row(st.theta.view(), diag));
  for (std::size_t it = 1; it <= stop.max_iters; ++it) {
    const Design before = st.theta;
    try {
      step(st);
    } catch (const Error& e) {
      trace.failure = e.what();
      break;
    }
    TraceRow row = detail::step_row(it, before.view(), st.theta.view(), st.direction, st.jhat, diag,
                                    stop.stationarity_t);
    row.grad_evals = st.grad_evals;
    row.sample_draws = st.sample_draws;
    row.weight_time_ns = st.weight_time_ns;
    const bool done = detail::should_stop(stop, row);
    trace.rows.push_back(std::move(row));
    if (observer) observer(st);
    if (done) break;
  }
  return trace;
}

}  // namespace

RunTrace run_csg(const Problem& problem, const Design& theta0, const WeightStrategy& strategy,
                 const StepSchedule& schedule, const JointMetric& metric, const StoppingRule& stop, Rng rng,
                 const StepOptions& options, const StepObserver& observer) {
  stop.validate();
  metric.validate();
  strategy.validate(problem.d_par, &problem.dist);
  CsgState st = make_csg_state(problem, theta0, std::move(rng));
  const detail::Diagnostics diag{problem.domain, problem.theta_star, problem.analytic_J, problem.analytic_gradJ};
  return drive(
      st, diag, stop, [&](CsgState& s) { csg_step(s, problem, strategy, schedule, metric, options); }, observer);
}

RunTrace run_csg(const ComposedObjective& composed, const Design& theta0, const WeightStrategy& strategy,
                 const StepSchedule& schedule, const JointMetric& metric, const StoppingRule& stop, Rng rng,
                 const StepOptions& options, const StepObserver& observer) {
  stop.validate();
  metric.validate();
  strategy.validate(composed.inner.d_par, &composed.inner.dist);
  if (composed.y_dist) strategy.validate(composed.d_y(), &*composed.y_dist);
  CsgState st = make_csg_state(composed, theta0, std::move(rng));
  const detail::Diagnostics diag{composed.inner.domain, composed.theta_star, composed.inner.analytic_J,
                                 composed.analytic_gradJ};
  return drive(
      st, diag, stop,
      [&](CsgState& s) { csg_step_composed(s, composed, strategy, schedule, metric, options); }, observer);
}

RunTrace run_csg(const Problem& problem, const WeightStrategy& strategy, const StepSchedule& schedule,
                 const JointMetric& metric, const StoppingRule& stop, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const auto& box = problem.domain;
  std::vector<double> start(box.dimension());
  for (std::size_t i = 0; i < start.size(); ++i) start[i] = uniform_in(rng, box.lower()[i], box.upper()[i]);
  return run_csg(problem, Design(std::move(start)), strategy, schedule, metric, stop, std::move(rng));
}

}  // namespace csg
