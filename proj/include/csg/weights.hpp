#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csg/distribution.hpp"
#include "csg/history.hpp"
#include "csg/types.hpp"

namespace csg {

/// Which integration-weight rule turns the history into a quadrature for
/// E[grad_theta j(theta_n, X)].
struct WeightStrategy {
  enum class Kind { exact, empirical, exact_hybrid, inexact_hybrid };

  Kind kind = Kind::empirical;
  /// Pool growth exponent, inexact hybrid only: floor(n^beta) samples by step n.
  double beta = 1.0;

  static WeightStrategy exact() { return {Kind::exact, 1.0}; }
  static WeightStrategy empirical() { return {Kind::empirical, 1.0}; }
  static WeightStrategy exact_hybrid() { return {Kind::exact_hybrid, 1.0}; }
  static WeightStrategy inexact_hybrid(double beta) { return {Kind::inexact_hybrid, beta}; }

  /// Throws ConfigError / UnsupportedConfiguration when the strategy cannot run
  /// with this parameter dimension and distribution.
  void validate(std::size_t d_par, const Distribution* dist) const;

  /// Total number of pool samples after step n (n for all but inexact hybrid).
  std::size_t pool_target(std::size_t n) const;
};

/// Parses exact | empirical | exact_hybrid | inexact_hybrid(beta).
WeightStrategy parse_weight_strategy(std::string_view text);
std::string to_string(const WeightStrategy& strategy);

/// Nonnegative integration weights alpha_0..alpha_{n-1} summing to one.
struct WeightVector {
  std::vector<double> alpha;

  std::size_t size() const { return alpha.size(); }
  double operator[](std::size_t k) const { return alpha[k]; }
  double sum() const;
};

/// Interval of the additively weighted 1-D Voronoi cell of record `owner`
/// inside the support.
struct Cell1D {
  std::size_t owner = 0;
  double left = 0.0;
  double right = 0.0;
};

/// Nearest-neighbour search used inside the weight rules. `naive` is the
/// O(n) linear scan per query; `indexed` uses the sorted views of the history.
enum class NeighborSearch { indexed, naive };

/// Reference joint nearest neighbour: argmin_k d((theta_k, x_k), (theta_n, x)),
/// ties to the smallest index. Indices are 0-based.
std::size_t joint_nearest(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                          std::span<const double> x);

/// Joint nearest-neighbour queries against a fixed (history, metric, theta_n).
///
/// With a one-dimensional parameter every distance is a V-shaped function
/// b_k + a2 |x - x_k| of the query, so the minimiser among records left of x
/// is the prefix minimiser of b_k - a2 x_k and among records right of x the
/// suffix minimiser of b_k + a2 x_k. The two candidates are compared with the
/// reference distance formula. For higher parameter dimensions records are
/// scanned outward in first-coordinate order and the scan stops once the
/// parameter distance alone exceeds the best distance found.
class JointNeighborIndex {
 public:
  JointNeighborIndex(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                     NeighborSearch mode = NeighborSearch::indexed);

  std::size_t nearest(std::span<const double> x) const;
  /// d((theta_k, x_k), (theta_n, x)) evaluated exactly as metric_distance does.
  double distance(std::size_t k, std::span<const double> x) const;
  /// a1 * ||theta_n - theta_k||.
  const std::vector<double>& offsets() const { return offsets_; }

  /// Sorted-order position -> record index of the best left / right candidate.
  const std::vector<std::size_t>& prefix_left() const { return prefix_left_; }
  const std::vector<std::size_t>& suffix_right() const { return suffix_right_; }

 private:
  std::size_t nearest_naive(std::span<const double> x) const;
  std::size_t nearest_envelope(double x0, std::span<const double> x) const;
  std::size_t nearest_pruned(std::span<const double> x) const;

  const History& hist_;
  JointMetric metric_;
  NeighborSearch mode_;
  std::vector<double> offsets_;
  std::vector<std::size_t> prefix_left_;
  std::vector<std::size_t> suffix_right_;
};

/// Joint nearest record of every record's own sample (the assignment shared
/// by the empirical and hybrid rules).
std::vector<std::size_t> assign_evaluation_samples(const History& hist, const JointMetric& m,
                                                   std::span<const double> theta_n,
                                                   NeighborSearch mode = NeighborSearch::indexed);

/// Cells of the lower envelope of b_k + a2 |x - x_k| over the support
/// (d_par = 1). Only nonempty cells are returned, ordered left to right.
/// Throws std::logic_error if some owner's cell is not a single interval.
std::vector<Cell1D> envelope_cells_1d(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                                      const Distribution& dist);

/// alpha_k = mu(M_k), the measure of the joint nearest-neighbour cell.
WeightVector exact_weights_1d(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                              const Distribution& dist);

/// alpha_k = (1/n) #{i : x_i falls in M_k}.
WeightVector empirical_weights(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                               NeighborSearch mode = NeighborSearch::indexed);

/// mu of the plain parameter-space Voronoi cell of each center (d_par = 1).
/// Duplicate centers share their cell's mass equally.
std::vector<double> xspace_voronoi_measures_1d(std::span<const Sample> centers, const Distribution& dist);

/// alpha_k = sum_i 1{x_i in M_k} mu(Voronoi cell of x_i).
WeightVector exact_hybrid_weights(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                                  const Distribution& dist, NeighborSearch mode = NeighborSearch::indexed);

/// Exact hybrid with the Voronoi measures replaced by pool counts:
/// alpha_k = (1/P) sum_i 1{x_{j_i} in M_k} #{pool samples nearest to x_{j_i}}.
/// Pool samples go to the nearest evaluation sample, ties to the smallest index.
WeightVector inexact_hybrid_weights(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                                    NeighborSearch mode = NeighborSearch::indexed);

/// Pool-sample counts per evaluation record (the second factor of the
/// inexact hybrid rule).
std::vector<std::size_t> pool_cell_counts(const History& hist, const JointMetric& m,
                                          NeighborSearch mode = NeighborSearch::indexed);

/// Dispatches on the strategy. `dist` is required by exact and exact_hybrid.
WeightVector compute_weights(const WeightStrategy& strategy, const History& hist, const JointMetric& m,
                             std::span<const double> theta_n, const Distribution* dist,
                             NeighborSearch mode = NeighborSearch::indexed);

}  // namespace csg
