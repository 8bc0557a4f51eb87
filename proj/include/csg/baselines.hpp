#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "csg/optimizer.hpp"
#include "csg/problem.hpp"
#include "csg/random.hpp"
#include "csg/schedule.hpp"

namespace csg {

/// Projected stochastic gradient step with one fresh sample.
Design sg_step(std::span<const double> theta, const Problem& problem, double tau, Rng& rng);

/// Gradient memory of SAG over a fixed finite sample set. Slots that were never
/// updated hold zero vectors.
struct SagTable {
  std::vector<Sample> samples;
  std::size_t d_des = 1;
  std::vector<double> grads;
  std::vector<double> jvals;

  std::size_t size() const { return samples.size(); }
  std::span<const double> slot(std::size_t i) const { return {grads.data() + i * d_des, d_des}; }
  /// Mean of all stored gradients.
  std::vector<double> mean() const;
  /// Mean of the stored objective values.
  double mean_value() const;
};

/// Draws the m samples of the finite sum; the table starts at zero.
SagTable make_sag_table(const Problem& problem, std::size_t m, Rng& rng);

/// Refreshes the gradient of `slot` at theta and steps along the table mean.
Design sag_step(std::span<const double> theta, const Problem& problem, double tau, std::size_t slot, SagTable& table);

struct ScgdState {
  Design theta;
  /// Running estimate of the inner expectation.
  std::vector<double> u;
  std::size_t k = 0;
  /// Extrapolated query point of the accelerated variant.
  std::optional<Design> extrapolated;
  /// Search direction of the last step.
  std::vector<double> direction;
};

ScgdState make_scgd_state(const Design& theta0);

/// One SCGD step with step alpha and averaging weight beta in (0, 1].
///
/// Basic: u+ = (1 - beta) u + beta g(theta, x), then
///   theta+ = Proj(theta - alpha (d_u f(y, u+) grad g(theta, x) + d_theta f)).
/// Accelerated: theta+ = Proj(theta - alpha (d_u f(y, u) grad g(theta, x) + d_theta f)),
///   z = (1 - 1/beta) theta + (1/beta) theta+, u+ = (1 - beta) u + beta g(z, x').
/// The sample x is drawn first, then y (if the outer function has one), then x'.
/// Throws ConfigError unless 0 < beta <= 1 and alpha >= 0.
void scgd_step(ScgdState& state, const ComposedObjective& composed, double alpha, double beta, bool accelerated,
               Rng& rng);

/// beta_k = min(1, c k^-p) for the averaging weights.
struct ScgdConfig {
  bool accelerated = false;
  StepSchedule alpha = StepSchedule::power(1.0, 0.75);
  StepSchedule beta = StepSchedule::power(1.0, 0.5);

  /// Step laws for a convex objective: alpha_k = k^-3/4, beta_k = k^-1/2.
  static ScgdConfig basic();
  /// Step laws for a strongly convex objective with modulus sigma:
  /// alpha_k = 1/(sigma k), beta_k = k^-4/5.
  static ScgdConfig accelerated_strongly_convex(double sigma);
};

RunTrace run_sg(const Problem& problem, const Design& theta0, const StepSchedule& schedule, const StoppingRule& stop,
                Rng rng);
RunTrace run_sag(const Problem& problem, const Design& theta0, const StepSchedule& schedule, std::size_t m,
                 const StoppingRule& stop, Rng rng);
RunTrace run_scgd(const ComposedObjective& composed, const Design& theta0, const ScgdConfig& config,
                  const StoppingRule& stop, Rng rng);

}  // namespace csg
