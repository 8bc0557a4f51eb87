#include "csg/problem.hpp"

namespace csg {

void Problem::validate() const {
  if (d_des == 0 || d_par == 0) throw InvalidInput("Problem '" + name + "': dimensions must be >= 1");
  if (domain.dimension() != d_des) throw InvalidInput("Problem '" + name + "': domain dimension != d_des");
  if (dist.dimension() != d_par) throw InvalidInput("Problem '" + name + "': distribution dimension != d_par");
  if (!j || !grad_j) throw InvalidInput("Problem '" + name + "': j and grad_j are required");
  if (!dist.sampler) throw InvalidInput("Problem '" + name + "': distribution has no sampler");
  if (theta_star && theta_star->size() != d_des) throw InvalidInput("Problem '" + name + "': theta* length != d_des");
}

void ComposedObjective::validate() const {
  inner.validate();
  if (!outer_partial_u) throw InvalidInput("ComposedObjective: outer_partial_u is required");
  if (y_dist && !y_dist->sampler) throw InvalidInput("ComposedObjective: y distribution has no sampler");
  if (theta_star && theta_star->size() != inner.d_des) throw InvalidInput("ComposedObjective: theta* length != d_des");
}

ComposedObjective identity_composition(const Problem& problem) {
  ComposedObjective c;
  c.inner = problem;
  c.outer_partial_u = [](std::span<const double>, double) { return 1.0; };
  c.outer_value = [](std::span<const double>, std::span<const double>, double u) { return u; };
  c.analytic_J = problem.analytic_J;
  c.analytic_gradJ = problem.analytic_gradJ;
  c.theta_star = problem.theta_star;
  return c;
}

}  // namespace csg
