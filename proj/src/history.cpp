#include "csg/history.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace csg {

History::History(std::size_t d_des, std::size_t d_par) : d_des_(d_des), d_par_(d_par) {
  if (d_des == 0 || d_par == 0) throw InvalidInput("History: dimensions must be >= 1");
}

History History::from_records(const std::vector<EvaluationRecord>& records) {
  if (records.empty()) throw InvalidInput("History::from_records: no records");
  History h(records.front().theta.size(), records.front().x.size());
  for (const auto& r : records) h.append(r);
  return h;
}

History History::from_records(const std::vector<EvaluationRecord>& records, const std::vector<Sample>& pool,
                              const std::vector<std::size_t>& eval_indices) {
  if (records.empty() || pool.empty()) throw InvalidInput("History::from_records: no records or empty pool");
  if (records.size() != eval_indices.size()) {
    throw InvalidInput("History::from_records: one eval index per record required");
  }
  History h(records.front().theta.size(), records.front().x.size());
  h.append_pool_samples(pool);
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto idx = eval_indices[k];
    if (idx >= pool.size()) throw InvalidInput("History::from_records: eval index out of range");
    if (!(pool[idx] == records[k].x)) {
      throw InvalidInput("History::from_records: record sample differs from its pool entry");
    }
    h.append_record(records[k].theta.view(), idx, records[k].grad, records[k].jval);
  }
  return h;
}

std::size_t History::append_pool_samples(std::span<const Sample> samples) {
  const std::size_t first = pool_count_;
  for (const auto& s : samples) {
    if (s.size() != d_par_) {
      throw InvalidInput("History: sample length " + std::to_string(s.size()) + " != d_par " +
                         std::to_string(d_par_));
    }
    pool_.insert(pool_.end(), s.begin(), s.end());
    ++pool_count_;
  }
  if (d_par_ == 1 && !samples.empty()) {
    std::vector<double> run;
    run.reserve(samples.size());
    for (const auto& s : samples) {
      run.push_back(s[0]);
      if (!empty()) count_new_pool_value(s[0]);
    }
    std::sort(run.begin(), run.end());
    pool_runs_.push_back(std::move(run));
    while (pool_runs_.size() >= 2 && pool_runs_[pool_runs_.size() - 2].size() <= pool_runs_.back().size()) {
      auto& a = pool_runs_[pool_runs_.size() - 2];
      const auto& b = pool_runs_.back();
      std::vector<double> merged(a.size() + b.size());
      std::merge(a.begin(), a.end(), b.begin(), b.end(), merged.begin());
      a = std::move(merged);
      pool_runs_.pop_back();
    }
  }
  return first;
}

namespace {

// Pool value p sits strictly between the group values u < w; true when it
// belongs to the left group under smallest-index tie breaking.
bool closer_to_left(double p, double u, std::size_t ru, double w, std::size_t rw) {
  const double dl = p - u;
  const double dr = w - p;
  return dl < dr || (dl == dr && ru < rw);
}

}  // namespace

History::Group History::group_at(std::size_t pos) const {
  const double v = sorted_x0_[pos];
  const auto start = std::lower_bound(sorted_x0_.begin(), sorted_x0_.end(), v) - sorted_x0_.begin();
  return {v, order_[static_cast<std::size_t>(start)]};
}

std::size_t History::pool_cut(const Group& left, const Group& right) const {
  std::size_t total = 0;
  for (const auto& run : pool_runs_) {
    const auto first = std::upper_bound(run.begin(), run.end(), left.value);
    const auto last = std::lower_bound(first, run.end(), right.value);
    const auto split = std::partition_point(
        first, last, [&](double p) { return closer_to_left(p, left.value, left.rep, right.value, right.rep); });
    total += static_cast<std::size_t>(split - run.begin());
  }
  return total;
}

void History::count_new_pool_value(double p) {
  const std::size_t n = sorted_x0_.size();
  const auto i = static_cast<std::size_t>(std::upper_bound(sorted_x0_.begin(), sorted_x0_.end(), p) -
                                          sorted_x0_.begin());
  if (i == 0) {
    ++cell_counts_[order_[0]];
    return;
  }
  const Group left = group_at(i - 1);
  if (i == n || left.value == p) {
    ++cell_counts_[left.rep];
    return;
  }
  const Group right{sorted_x0_[i], order_[i]};
  ++cell_counts_[closer_to_left(p, left.value, left.rep, right.value, right.rep) ? left.rep : right.rep];
}

void History::recount_around(std::size_t pos) {
  // The new record sits alone at sorted position pos; only its own cell and
  // the cells of the neighbouring groups change.
  const std::size_t n = sorted_x0_.size();
  const std::size_t total = pool_count_;
  const Group mid{sorted_x0_[pos], order_[pos]};

  const bool has_left = pos > 0;
  const bool has_right = pos + 1 < n;
  std::size_t cut_before_left = 0;
  std::size_t cut_left_mid = 0;
  std::size_t cut_mid_right = total;
  std::size_t cut_after_right = total;
  Group left{}, right{};
  if (has_left) {
    left = group_at(pos - 1);
    const auto left_start = static_cast<std::size_t>(
        std::lower_bound(sorted_x0_.begin(), sorted_x0_.end(), left.value) - sorted_x0_.begin());
    if (left_start > 0) cut_before_left = pool_cut(group_at(left_start - 1), left);
    cut_left_mid = pool_cut(left, mid);
  }
  if (has_right) {
    right = Group{sorted_x0_[pos + 1], order_[pos + 1]};
    const auto right_end = static_cast<std::size_t>(
        std::upper_bound(sorted_x0_.begin(), sorted_x0_.end(), right.value) - sorted_x0_.begin());
    if (right_end < n) cut_after_right = pool_cut(right, Group{sorted_x0_[right_end], order_[right_end]});
    cut_mid_right = pool_cut(mid, right);
  }
  if (has_left) cell_counts_[left.rep] = cut_left_mid - cut_before_left;
  cell_counts_[mid.rep] = cut_mid_right - cut_left_mid;
  if (has_right) cell_counts_[right.rep] = cut_after_right - cut_mid_right;
}

void History::append_record(std::span<const double> theta, std::size_t pool_index, std::span<const double> grad,
                            double jval) {
  if (theta.size() != d_des_) throw InvalidInput("History: theta length does not match d_des");
  if (grad.size() != d_des_) throw InvalidInput("History: gradient length does not match d_des");
  if (pool_index >= pool_count_) throw InvalidInput("History: pool index out of range");
  const std::size_t k = size();
  thetas_.insert(thetas_.end(), theta.begin(), theta.end());
  grads_.insert(grads_.end(), grad.begin(), grad.end());
  jvals_.push_back(jval);
  eval_indices_.push_back(pool_index);

  // Insert after all records with an equal first coordinate: ties stay in index order.
  const double key = pool_sample(pool_index)[0];
  const auto pos = std::upper_bound(sorted_x0_.begin(), sorted_x0_.end(), key) - sorted_x0_.begin();
  const bool duplicate = pos > 0 && sorted_x0_[static_cast<std::size_t>(pos) - 1] == key;
  sorted_x0_.insert(sorted_x0_.begin() + pos, key);
  order_.insert(order_.begin() + pos, k);
  if (d_par_ == 1) {
    cell_counts_.push_back(0);
    if (!duplicate) recount_around(static_cast<std::size_t>(pos));
  }
}

void History::append(const EvaluationRecord& record) {
  const std::size_t idx = append_pool_sample(record.x);
  append_record(record.theta.view(), idx, record.grad, record.jval);
}

EvaluationRecord History::record(std::size_t k) const {
  if (k >= size()) throw InvalidInput("History::record: index out of range");
  EvaluationRecord r;
  r.theta = Design(theta(k));
  r.x = Sample(x(k));
  const auto g = grad(k);
  r.grad.assign(g.begin(), g.end());
  r.jval = jvals_[k];
  return r;
}

}  // namespace csg
