#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csg/types.hpp"

namespace csg {

/// One past evaluation (theta_k, x_k, g_k, j_k).
struct EvaluationRecord {
  Design theta;
  Sample x;
  std::vector<double> grad;
  double jval = 0.0;
};

/// Ordered evaluation records plus the pool of all drawn parameter samples.
///
/// Records are indexed 0..n-1 in evaluation order. The sample of record k is
/// pool entry eval_index(k); for every strategy except inexact hybrid the pool
/// holds exactly the evaluation samples. Storage is flat so that histories of
/// several thousand records and pools of a few hundred thousand samples stay
/// cheap to scan.
///
/// The history also maintains sorted views used by the weight module: the
/// record indices ordered by (first sample coordinate, index) and, for a
/// one-dimensional parameter, the number of pool samples in the plain
/// parameter-space Voronoi cell of every evaluation sample. Those counts are
/// updated incrementally: new pool samples are located by binary search and a
/// new evaluation sample only changes the cells of its two neighbours.
class History {
 public:
  History(std::size_t d_des, std::size_t d_par);

  /// Pool = the record samples, eval_index(k) = k.
  static History from_records(const std::vector<EvaluationRecord>& records);
  /// Explicit pool; records[k].x must equal pool[eval_indices[k]].
  static History from_records(const std::vector<EvaluationRecord>& records, const std::vector<Sample>& pool,
                              const std::vector<std::size_t>& eval_indices);

  std::size_t d_des() const { return d_des_; }
  std::size_t d_par() const { return d_par_; }
  std::size_t size() const { return jvals_.size(); }
  bool empty() const { return jvals_.empty(); }
  std::size_t pool_size() const { return pool_count_; }

  /// Appends a batch of drawn samples; returns the pool index of the first.
  std::size_t append_pool_samples(std::span<const Sample> samples);
  std::size_t append_pool_sample(const Sample& sample) { return append_pool_samples({&sample, 1}); }

  /// Appends a record evaluated at pool entry `pool_index`.
  void append_record(std::span<const double> theta, std::size_t pool_index, std::span<const double> grad,
                     double jval);
  /// Appends the record's sample to the pool and then the record itself.
  void append(const EvaluationRecord& record);

  std::span<const double> theta(std::size_t k) const { return {thetas_.data() + k * d_des_, d_des_}; }
  std::span<const double> x(std::size_t k) const { return pool_sample(eval_indices_[k]); }
  std::span<const double> grad(std::size_t k) const { return {grads_.data() + k * d_des_, d_des_}; }
  double jval(std::size_t k) const { return jvals_[k]; }
  std::size_t eval_index(std::size_t k) const { return eval_indices_[k]; }
  const std::vector<std::size_t>& eval_indices() const { return eval_indices_; }
  std::span<const double> pool_sample(std::size_t m) const { return {pool_.data() + m * d_par_, d_par_}; }

  EvaluationRecord record(std::size_t k) const;

  /// Record indices sorted by (x_k[0], k).
  const std::vector<std::size_t>& order_by_x() const { return order_; }
  /// First sample coordinate of each record, in order_by_x() order.
  const std::vector<double>& sorted_x0() const { return sorted_x0_; }
  /// One-dimensional parameter only: pool samples whose nearest evaluation
  /// sample (ties to the smallest record index) is record k. Records sharing a
  /// sample value report the whole count on the smallest index.
  const std::vector<std::size_t>& pool_cell_counts() const { return cell_counts_; }

 private:
  std::size_t d_des_;
  std::size_t d_par_;
  std::vector<double> thetas_;
  std::vector<double> grads_;
  std::vector<double> jvals_;
  std::vector<double> pool_;
  std::size_t pool_count_ = 0;
  std::vector<std::size_t> eval_indices_;
  std::vector<std::size_t> order_;
  std::vector<double> sorted_x0_;
  // Sorted runs of pool values with geometrically decreasing lengths.
  std::vector<std::vector<double>> pool_runs_;
  std::vector<std::size_t> cell_counts_;

  struct Group {
    double value;
    std::size_t rep;
  };
  Group group_at(std::size_t pos) const;
  std::size_t pool_cut(const Group& left, const Group& right) const;
  void count_new_pool_value(double p);
  void recount_around(std::size_t pos);
};

}  // namespace csg
