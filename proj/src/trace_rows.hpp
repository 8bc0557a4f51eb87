#pragma once

// Trace bookkeeping shared by the CSG driver and the baseline drivers.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "csg/optimizer.hpp"

namespace csg::detail {

struct Diagnostics {
  BoxDomain box;
  std::optional<Design> theta_star;
  std::function<double(std::span<const double>)> objective;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

inline double distance2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline TraceRow initial_row(std::span<const double> theta, const Diagnostics& diag) {
  TraceRow row;
  row.theta.assign(theta.begin(), theta.end());
  if (diag.theta_star) row.abs_error = distance2(theta, diag.theta_star->view());
  return row;
}

/// Row for step `iteration`: `before` is the design the step sampled at,
/// `after` the new iterate.
inline TraceRow step_row(std::size_t iteration, std::span<const double> before, std::span<const double> after,
                         std::span<const double> direction, double jhat, const Diagnostics& diag, double probe_t) {
  TraceRow row;
  row.iteration = iteration;
  row.theta.assign(after.begin(), after.end());
  if (diag.theta_star) row.abs_error = distance2(after, diag.theta_star->view());
  row.jhat = jhat;
  row.stationarity = stationarity_measure(before, direction, probe_t, diag.box);
  if (diag.gradient) row.grad_error = distance2(direction, diag.gradient(before));
  if (diag.objective) row.obj_error = std::fabs(jhat - diag.objective(before));
  return row;
}

inline bool should_stop(const StoppingRule& stop, const TraceRow& row) {
  return stop.stationarity_tol && row.stationarity <= *stop.stationarity_tol;
}

}  // namespace csg::detail
