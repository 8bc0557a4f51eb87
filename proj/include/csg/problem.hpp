#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csg/distribution.hpp"
#include "csg/types.hpp"

namespace csg {

using ScalarFn = std::function<double(std::span<const double> theta, std::span<const double> x)>;
using GradientFn = std::function<std::vector<double>(std::span<const double> theta, std::span<const double> x)>;

/// Objective J(theta) = E_X[j(theta, X)] over a box of designs.
///
/// analytic_J, analytic_gradJ and theta_star are diagnostics only; no
/// optimizer reads them to take a step.
struct Problem {
  std::string name;
  std::size_t d_des = 1;
  std::size_t d_par = 1;
  BoxDomain domain;
  Distribution dist;
  ScalarFn j;
  GradientFn grad_j;
  std::function<double(std::span<const double>)> analytic_J;
  std::function<std::vector<double>(std::span<const double>)> analytic_gradJ;
  std::optional<Design> theta_star;

  /// Checks dimensions and that the sampling procedures are present.
  void validate() const;
};

/// J~(theta) = E_Y[f(theta, Y, E_X[j(theta, X)])] with a scalar inner expectation.
///
/// When y_dist is empty the outer function has no random argument and every
/// outer callback receives an empty y.
struct ComposedObjective {
  Problem inner;
  std::function<double(std::span<const double> y, double u)> outer_partial_u;
  /// d f / d theta; treated as zero when absent.
  std::function<std::vector<double>(std::span<const double> theta, std::span<const double> y, double u)>
      outer_partial_theta;
  /// f itself; only the deterministic oracle needs it.
  std::function<double(std::span<const double> theta, std::span<const double> y, double u)> outer_value;
  std::optional<Distribution> y_dist;

  std::function<double(std::span<const double>)> analytic_J;
  std::function<std::vector<double>(std::span<const double>)> analytic_gradJ;
  std::optional<Design> theta_star;

  std::size_t d_y() const { return y_dist ? y_dist->dimension() : 0; }
  void validate() const;
};

/// The composition f(y, u) = u, which turns any problem into a composed one
/// with the same objective.
ComposedObjective identity_composition(const Problem& problem);

}  // namespace csg
