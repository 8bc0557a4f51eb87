#include "csg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trace_rows.hpp"

namespace csg {

namespace {

void require_finite_sample(std::span<const double> g, double jv, const char* who) {
  bool ok = std::isfinite(jv);
  for (double v : g) ok = ok && std::isfinite(v);
  if (!ok) throw NumericError(std::string(who) + ": non-finite objective or gradient sample");
}

Design descend(const BoxDomain& box, std::span<const double> theta, double tau, std::span<const double> dir) {
  if (!(std::isfinite(tau) && tau >= 0.0)) throw InvalidInput("step length must be finite and >= 0");
  std::vector<double> v(theta.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = theta[i] - tau * dir[i];
  return project_box(box, v);
}

struct SgOutcome {
  Design theta;
  std::vector<double> grad;
  double jval;
};

SgOutcome sg_core(std::span<const double> theta, const Problem& problem, double tau, Rng& rng) {
  const Sample x = problem.dist.sample(rng);
  SgOutcome out;
  out.jval = problem.j(theta, x.view());
  out.grad = problem.grad_j(theta, x.view());
  require_finite_sample(out.grad, out.jval, "sg_step");
  out.theta = descend(problem.domain, theta, tau, out.grad);
  return out;
}

detail::Diagnostics plain_diagnostics(const Problem& p) {
  return {p.domain, p.theta_star, p.analytic_J, p.analytic_gradJ};
}

/// Runs `step(n, before)` for n = 1..max_iters; the step returns the row for
/// iteration n with theta filled in.
template <class StepFn>
RunTrace drive_baseline(std::span<const double> theta0, const detail::Diagnostics& diag, const StoppingRule& stop,
                        StepFn&& step) {
  stop.validate();
  RunTrace trace;
  trace.rows.reserve(stop.max_iters + 1);
  trace.rows.push_back(detail::initial_row(theta0, diag));
  for (std::size_t n = 1; n <= stop.max_iters; ++n) {
    TraceRow row;
    try {
      row = step(n);
    } catch (const Error& e) {
      trace.failure = std::string(e.what()) + " (iteration " + std::to_string(n) + ")";
      break;
    }
    const bool done = detail::should_stop(stop, row);
    trace.rows.push_back(std::move(row));
    if (done) break;
  }
  return trace;
}

}  // namespace

Design sg_step(std::span<const double> theta, const Problem& problem, double tau, Rng& rng) {
  return sg_core(theta, problem, tau, rng).theta;
}

std::vector<double> SagTable::mean() const {
  std::vector<double> m(d_des, 0.0);
  for (std::size_t s = 0; s < size(); ++s) {
    for (std::size_t i = 0; i < d_des; ++i) m[i] += grads[s * d_des + i];
  }
  for (double& v : m) v /= static_cast<double>(size());
  return m;
}

double SagTable::mean_value() const {
  double s = 0.0;
  for (double v : jvals) s += v;
  return s / static_cast<double>(jvals.size());
}

SagTable make_sag_table(const Problem& problem, std::size_t m, Rng& rng) {
  if (m == 0) throw ConfigError("sag: sample set size must be >= 1");
  SagTable t;
  t.d_des = problem.d_des;
  t.samples.reserve(m);
  for (std::size_t i = 0; i < m; ++i) t.samples.push_back(problem.dist.sample(rng));
  t.grads.assign(m * problem.d_des, 0.0);
  t.jvals.assign(m, 0.0);
  return t;
}

Design sag_step(std::span<const double> theta, const Problem& problem, double tau, std::size_t slot,
                SagTable& table) {
  if (slot >= table.size()) throw InvalidInput("sag_step: slot out of range");
  const auto x = table.samples[slot].view();
  const double jv = problem.j(theta, x);
  const auto g = problem.grad_j(theta, x);
  if (g.size() != table.d_des) throw InvalidInput("sag_step: gradient has the wrong length");
  require_finite_sample(g, jv, "sag_step");
  std::copy(g.begin(), g.end(), table.grads.begin() + static_cast<std::ptrdiff_t>(slot * table.d_des));
  table.jvals[slot] = jv;
  return descend(problem.domain, theta, tau, table.mean());
}

ScgdState make_scgd_state(const Design& theta0) {
  ScgdState s;
  s.theta = theta0;
  s.u.assign(1, 0.0);
  return s;
}

void scgd_step(ScgdState& state, const ComposedObjective& composed, double alpha, double beta, bool accelerated,
               Rng& rng) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("scgd_step: beta must lie in (0, 1]");
  if (!(std::isfinite(alpha) && alpha >= 0.0)) throw ConfigError("scgd_step: alpha must be finite and >= 0");
  const Problem& inner = composed.inner;
  const auto theta = state.theta.view();
  const Sample x = inner.dist.sample(rng);
  Sample y;
  if (composed.y_dist) y = composed.y_dist->sample(rng);

  const double gval = inner.j(theta, x.view());
  const auto grad = inner.grad_j(theta, x.view());
  require_finite_sample(grad, gval, "scgd_step");

  auto direction_at = [&](double u) {
    const double du = composed.outer_partial_u(y.view(), u);
    std::vector<double> dir(grad.size());
    for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = du * grad[i];
    if (composed.outer_partial_theta) {
      const auto pt = composed.outer_partial_theta(theta, y.view(), u);
      for (std::size_t i = 0; i < dir.size(); ++i) dir[i] += pt[i];
    }
    return dir;
  };

  if (!accelerated) {
    state.u[0] = (1.0 - beta) * state.u[0] + beta * gval;
    state.direction = direction_at(state.u[0]);
    state.theta = descend(inner.domain, theta, alpha, state.direction);
  } else {
    state.direction = direction_at(state.u[0]);
    Design next = descend(inner.domain, theta, alpha, state.direction);
    std::vector<double> z(next.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - 1.0 / beta) * theta[i] + (1.0 / beta) * next[i];
    const Sample x2 = inner.dist.sample(rng);
    const double gz = inner.j(z, x2.view());
    if (!std::isfinite(gz)) throw NumericError("scgd_step: non-finite inner value at the extrapolated point");
    state.u[0] = (1.0 - beta) * state.u[0] + beta * gz;
    state.extrapolated = Design(std::move(z));
    state.theta = std::move(next);
  }
  ++state.k;
}

ScgdConfig ScgdConfig::basic() { return ScgdConfig{}; }

ScgdConfig ScgdConfig::accelerated_strongly_convex(double sigma) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) throw ConfigError("aSCGD: convexity modulus must be > 0");
  ScgdConfig c;
  c.accelerated = true;
  c.alpha = StepSchedule::power(1.0 / sigma, 1.0);
  c.beta = StepSchedule::power(1.0, 0.8);
  return c;
}

RunTrace run_sg(const Problem& problem, const Design& theta0, const StepSchedule& schedule, const StoppingRule& stop,
                Rng rng) {
  problem.validate();
  const auto diag = plain_diagnostics(problem);
  Design theta = theta0;
  return drive_baseline(theta0.view(), diag, stop, [&](std::size_t n) {
    const Design before = theta;
    const SgOutcome out = sg_core(before.view(), problem, schedule.step(n), rng);
    theta = out.theta;
    TraceRow row = detail::step_row(n, before.view(), theta.view(), out.grad, out.jval, diag, stop.stationarity_t);
    row.grad_evals = n;
    row.sample_draws = n;
    return row;
  });
}

RunTrace run_sag(const Problem& problem, const Design& theta0, const StepSchedule& schedule, std::size_t m,
                 const StoppingRule& stop, Rng rng) {
  problem.validate();
  const auto diag = plain_diagnostics(problem);
  SagTable table = make_sag_table(problem, m, rng);
  Design theta = theta0;
  return drive_baseline(theta0.view(), diag, stop, [&](std::size_t n) {
    const Design before = theta;
    const std::size_t slot = uniform_index(rng, table.size());
    theta = sag_step(before.view(), problem, schedule.step(n), slot, table);
    TraceRow row = detail::step_row(n, before.view(), theta.view(), table.mean(), table.mean_value(), diag,
                                    stop.stationarity_t);
    row.grad_evals = n;
    row.sample_draws = table.size();
    return row;
  });
}

RunTrace run_scgd(const ComposedObjective& composed, const Design& theta0, const ScgdConfig& config,
                  const StoppingRule& stop, Rng rng) {
  composed.validate();
  const detail::Diagnostics diag{composed.inner.domain, composed.theta_star, composed.inner.analytic_J,
                                 composed.analytic_gradJ};
  ScgdState state = make_scgd_state(theta0);
  std::size_t draws = 0;
  const std::size_t per_step = 1 + (composed.y_dist ? 1 : 0) + (config.accelerated ? 1 : 0);
  return drive_baseline(theta0.view(), diag, stop, [&](std::size_t n) {
    const Design before = state.theta;
    const double beta = std::min(1.0, config.beta.step(n));
    scgd_step(state, composed, config.alpha.step(n), beta, config.accelerated, rng);
    draws += per_step;
    TraceRow row = detail::step_row(n, before.view(), state.theta.view(), state.direction, state.u[0], diag,
                                    stop.stationarity_t);
    row.grad_evals = n;
    row.sample_draws = draws;
    return row;
  });
}

}  // namespace csg
