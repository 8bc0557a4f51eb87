#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

#include "csg/problem.hpp"

namespace csg {

/// P = X = [-1/2, 1/2], X uniform, j(theta, x) = (x - theta)^2 / 2.
/// J(theta) = theta^2 / 2 + 1/24 and theta* = 0.
Problem make_quadratic_1d();

/// P = [0, 10], X uniform on [-1, 1], Y uniform on [-3, 3],
/// inner g(theta, x) = 10 cos((theta - x) / pi), outer f(y, u) = 0.3 (2y + u)^2.
/// The minimiser is theta* = pi^2 / 2.
ComposedObjective make_nested_cosine();

/// Smoothed chance-constraint penalty on P = [0, 3/4]: minimise
/// -theta + lambda * max(0, u(theta) - 1/2) with
/// u(theta) = E[(tanh(a (theta - X^2)) + 1) / 2], X uniform on [-1, 1].
/// The outer derivative uses subgradient_max0 at the kink.
/// Throws ConfigError unless lambda > 0 and a > 0.
ComposedObjective make_chance_penalty(double lambda, double a);

/// Step size used for CSG on the nested cosine problem.
inline constexpr double kNestedCosineStep = 1.0 / 30.0;
/// Curvature of the nested cosine objective at its minimiser, 0.6 (10 sin(1/pi))^2.
/// The default aSCGD step law uses it as the strong convexity modulus.
double nested_cosine_convexity();

/// Composite Simpson rule with `panels` (even) subintervals.
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels);

/// Simpson with a Richardson check against half the panels; the panel count
/// doubles from 10^4 until the estimated error is below `tol`. Throws
/// NumericError if the cap is reached first.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

/// Deterministic value of the composed objective at theta (d_des = d_par = 1,
/// Y at most one-dimensional), by quadrature against the densities.
double composed_objective_value(const ComposedObjective& c, double theta);
/// Same for a plain problem: E_X[j(theta, X)].
double objective_value(const Problem& p, double theta);

/// Brute-force minimiser over the one-dimensional design interval: a coarse
/// grid followed by repeated 21-point refinements around the best point until
/// the grid spacing is at most `resolution`.
Design theta_opt_oracle(const ComposedObjective& c, double resolution);
Design theta_opt_oracle(const Problem& p, double resolution);

}  // namespace csg
