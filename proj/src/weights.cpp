#include "csg/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace csg {

namespace {

constexpr double kPruneSlack = 1.0 - 1e-12;

void require_nonempty(const History& hist, const char* who) {
  if (hist.empty()) throw InvalidState(std::string(who) + ": empty history");
}

void require_exact_support(const History& hist, const Distribution& dist, const char* who) {
  if (hist.d_par() != 1 || dist.dimension() != 1) {
    throw UnsupportedConfiguration(std::string(who) + ": exact cell measures need a one-dimensional parameter");
  }
  if (!dist.has_cdf()) throw UnsupportedConfiguration(std::string(who) + ": distribution has no CDF");
}

bool better(double d, std::size_t k, double best_d, std::size_t best_k) {
  return d < best_d || (d == best_d && k < best_k);
}

WeightVector normalize_counts(const std::vector<std::size_t>& counts, std::size_t total) {
  WeightVector w;
  w.alpha.resize(counts.size());
  const double denom = static_cast<double>(total);
  for (std::size_t k = 0; k < counts.size(); ++k) w.alpha[k] = static_cast<double>(counts[k]) / denom;
  return w;
}

/// Groups of equal sample values in sorted order: [begin, end) positions.
struct Group {
  std::size_t begin;
  std::size_t end;
};

std::vector<Group> value_groups(const std::vector<double>& sorted) {
  std::vector<Group> groups;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    groups.push_back({i, j});
    i = j;
  }
  return groups;
}

double midpoint(double a, double b) { return 0.5 * (a + b); }

/// CDF at the Voronoi boundaries of the value groups: entry g is the left end
/// of group g's cell, the last entry is the upper end of the support.
std::vector<double> boundary_cdf(const std::vector<double>& sorted, const std::vector<Group>& groups,
                                 const Distribution& dist) {
  std::vector<double> cb(groups.size() + 1);
  cb.front() = dist.cdf(dist.support.lower()[0]);
  cb.back() = dist.cdf(dist.support.upper()[0]);
  for (std::size_t g = 1; g < groups.size(); ++g) {
    cb[g] = dist.cdf(midpoint(sorted[groups[g - 1].begin], sorted[groups[g].begin]));
  }
  return cb;
}

}  // namespace

void WeightStrategy::validate(std::size_t d_par, const Distribution* dist) const {
  if (kind == Kind::inexact_hybrid && !(std::isfinite(beta) && beta >= 1.0)) {
    throw ConfigError("inexact_hybrid: beta must be >= 1");
  }
  if (kind == Kind::exact || kind == Kind::exact_hybrid) {
    if (d_par != 1) {
      throw UnsupportedConfiguration(to_string(*this) + " weights need a one-dimensional parameter");
    }
    if (dist == nullptr || !dist->has_cdf()) {
      throw UnsupportedConfiguration(to_string(*this) + " weights need a distribution with a CDF");
    }
  }
}

std::size_t WeightStrategy::pool_target(std::size_t n) const {
  if (kind != Kind::inexact_hybrid || n == 0) return n;
  const auto p = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), beta)));
  return std::max(p, n);
}

WeightStrategy parse_weight_strategy(std::string_view text) {
  if (text == "exact") return WeightStrategy::exact();
  if (text == "empirical") return WeightStrategy::empirical();
  if (text == "exact_hybrid" || text == "hybrid") return WeightStrategy::exact_hybrid();
  constexpr std::string_view prefix = "inexact_hybrid(";
  if (text.starts_with(prefix) && text.ends_with(")")) {
    const std::string arg(text.substr(prefix.size(), text.size() - prefix.size() - 1));
    std::size_t used = 0;
    double beta = 0.0;
    try {
      beta = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size() || arg.empty()) throw ConfigError("inexact_hybrid: cannot parse beta '" + arg + "'");
    WeightStrategy s = WeightStrategy::inexact_hybrid(beta);
    s.validate(1, nullptr);
    return s;
  }
  throw ConfigError("unknown weight strategy '" + std::string(text) +
                    "' (expected exact, empirical, exact_hybrid or inexact_hybrid(beta))");
}

std::string to_string(const WeightStrategy& strategy) {
  switch (strategy.kind) {
    case WeightStrategy::Kind::exact:
      return "exact";
    case WeightStrategy::Kind::empirical:
      return "empirical";
    case WeightStrategy::Kind::exact_hybrid:
      return "exact_hybrid";
    case WeightStrategy::Kind::inexact_hybrid: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "inexact_hybrid(%g)", strategy.beta);
      return buf;
    }
  }
  return "empirical";
}

double WeightVector::sum() const { return std::accumulate(alpha.begin(), alpha.end(), 0.0); }

std::size_t joint_nearest(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                          std::span<const double> x) {
  require_nonempty(hist, "joint_nearest");
  if (theta_n.size() != hist.d_des() || x.size() != hist.d_par()) {
    throw InvalidInput("joint_nearest: dimension mismatch");
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < hist.size(); ++k) {
    const double d = metric_distance(m, hist.theta(k), hist.x(k), theta_n, x);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// JointNeighborIndex

JointNeighborIndex::JointNeighborIndex(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                                       NeighborSearch mode)
    : hist_(hist), metric_(m), mode_(mode) {
  require_nonempty(hist, "JointNeighborIndex");
  m.validate();
  if (theta_n.size() != hist.d_des()) throw InvalidInput("JointNeighborIndex: theta length does not match d_des");
  const std::size_t n = hist.size();
  offsets_.resize(n);
  for (std::size_t k = 0; k < n; ++k) offsets_[k] = m.a1 * norm_of_difference(m.design_norm, hist.theta(k), theta_n);

  if (mode_ == NeighborSearch::indexed && hist.d_par() == 1) {
    const auto& order = hist.order_by_x();
    const auto& xs = hist.sorted_x0();
    prefix_left_.resize(n);
    suffix_right_.resize(n);
    double best_l = std::numeric_limits<double>::infinity();
    std::size_t arg_l = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = order[i];
      const double l = offsets_[k] - m.a2 * xs[i];
      if (better(l, k, best_l, arg_l)) {
        best_l = l;
        arg_l = k;
      }
      prefix_left_[i] = arg_l;
    }
    double best_r = std::numeric_limits<double>::infinity();
    std::size_t arg_r = 0;
    for (std::size_t i = n; i-- > 0;) {
      const std::size_t k = order[i];
      const double r = offsets_[k] + m.a2 * xs[i];
      if (better(r, k, best_r, arg_r)) {
        best_r = r;
        arg_r = k;
      }
      suffix_right_[i] = arg_r;
    }
  }
}

double JointNeighborIndex::distance(std::size_t k, std::span<const double> x) const {
  return offsets_[k] + metric_.a2 * norm_of_difference(metric_.param_norm, hist_.x(k), x);
}

std::size_t JointNeighborIndex::nearest(std::span<const double> x) const {
  if (x.size() != hist_.d_par()) throw InvalidInput("JointNeighborIndex: sample length does not match d_par");
  if (mode_ == NeighborSearch::naive) return nearest_naive(x);
  if (hist_.d_par() == 1) return nearest_envelope(x[0], x);
  return nearest_pruned(x);
}

std::size_t JointNeighborIndex::nearest_naive(std::span<const double> x) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    const double d = distance(k, x);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::size_t JointNeighborIndex::nearest_envelope(double x0, std::span<const double> x) const {
  const auto& xs = hist_.sorted_x0();
  const auto pos = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x0) - xs.begin());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  bool found = false;
  auto consider = [&](std::size_t k) {
    const double d = distance(k, x);
    if (!found || better(d, k, best_d, best)) {
      best_d = d;
      best = k;
      found = true;
    }
  };
  if (pos > 0) consider(prefix_left_[pos - 1]);
  if (pos < xs.size()) consider(suffix_right_[pos]);
  return best;
}

std::size_t JointNeighborIndex::nearest_pruned(std::span<const double> x) const {
  const auto& order = hist_.order_by_x();
  const auto& xs = hist_.sorted_x0();
  const double x0 = x[0];
  const auto start = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x0) - xs.begin());
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = start; i < xs.size(); ++i) {
    if (metric_.a2 * (xs[i] - x0) * kPruneSlack > best_d) break;
    const std::size_t k = order[i];
    const double d = distance(k, x);
    if (better(d, k, best_d, best)) {
      best_d = d;
      best = k;
    }
  }
  for (std::size_t i = start; i-- > 0;) {
    if (metric_.a2 * (x0 - xs[i]) * kPruneSlack > best_d) break;
    const std::size_t k = order[i];
    const double d = distance(k, x);
    if (better(d, k, best_d, best)) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<std::size_t> assign_evaluation_samples(const History& hist, const JointMetric& m,
                                                   std::span<const double> theta_n, NeighborSearch mode) {
  const JointNeighborIndex index(hist, m, theta_n, mode);
  std::vector<std::size_t> owner(hist.size());
  if (mode == NeighborSearch::naive || hist.d_par() != 1) {
    for (std::size_t i = 0; i < hist.size(); ++i) owner[i] = index.nearest(hist.x(i));
    return owner;
  }
  // The queries are the records' own samples, already sorted: the envelope
  // candidates of a group of equal values are the prefix winner at its last
  // position and the suffix winner just past it.
  const auto& order = hist.order_by_x();
  const auto& xs = hist.sorted_x0();
  const auto& pl = index.prefix_left();
  const auto& sr = index.suffix_right();
  const std::size_t n = xs.size();
  std::size_t b = 0;
  while (b < n) {
    std::size_t e = b + 1;
    while (e < n && xs[e] == xs[b]) ++e;
    const auto x = hist.x(order[b]);
    std::size_t best = pl[e - 1];
    if (e < n) {
      const std::size_t cand = sr[e];
      const double d_best = index.distance(best, x);
      const double d_cand = index.distance(cand, x);
      if (better(d_cand, cand, d_best, best)) best = cand;
    }
    for (std::size_t i = b; i < e; ++i) owner[order[i]] = best;
    b = e;
  }
  return owner;
}

// ---------------------------------------------------------------------------
// Exact weights

std::vector<Cell1D> envelope_cells_1d(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                                      const Distribution& dist) {
  require_nonempty(hist, "envelope_cells_1d");
  require_exact_support(hist, dist, "envelope_cells_1d");
  const JointNeighborIndex index(hist, m, theta_n, NeighborSearch::indexed);
  const auto& order = hist.order_by_x();
  const auto& xs = hist.sorted_x0();
  const auto& off = index.offsets();
  const auto& pl = index.prefix_left();
  const auto& sr = index.suffix_right();
  const std::size_t n = hist.size();
  const double lo = dist.support.lower()[0];
  const double hi = dist.support.upper()[0];
  const double inf = std::numeric_limits<double>::infinity();

  // Raw pieces, contiguous from lo to hi.
  std::vector<Cell1D> pieces;
  auto push = [&](std::size_t owner, double a, double b) {
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (b > a) pieces.push_back({owner, a, b});
  };
  push(sr[0], -inf, xs[0]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(xs[i] < xs[i + 1])) continue;
    const std::size_t left = pl[i];
    const std::size_t right = sr[i + 1];
    const double xl = hist.x(left)[0];
    const double xr = hist.x(right)[0];
    const double r_val = off[right] + m.a2 * xr;
    const double l_val = off[left] - m.a2 * xl;
    const double cross = std::clamp((r_val - l_val) / (2.0 * m.a2), xs[i], xs[i + 1]);
    push(left, xs[i], cross);
    push(right, cross, xs[i + 1]);
  }
  push(pl[n - 1], xs[n - 1], inf);
  (void)order;

  // Rounding in the crossing points can leave zero-width slivers; give them to
  // the preceding cell, then merge runs of the same owner.
  const double max_off = *std::max_element(off.begin(), off.end());
  const double sliver = 1e-12 * (hi - lo) + 16.0 * std::numeric_limits<double>::epsilon() * (max_off / m.a2 + std::max(std::fabs(lo), std::fabs(hi)));
  std::vector<Cell1D> cells;
  for (const auto& p : pieces) {
    if (!cells.empty() && (p.right - p.left <= sliver || p.owner == cells.back().owner)) {
      cells.back().right = p.right;
      continue;
    }
    cells.push_back(p);
  }
  std::vector<char> seen(n, 0);
  for (const auto& c : cells) {
    if (seen[c.owner]) throw std::logic_error("envelope_cells_1d: a joint nearest-neighbour cell is not an interval");
    seen[c.owner] = 1;
  }
  return cells;
}

WeightVector exact_weights_1d(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                              const Distribution& dist) {
  const auto cells = envelope_cells_1d(hist, m, theta_n, dist);
  WeightVector w;
  w.alpha.assign(hist.size(), 0.0);
  for (const auto& c : cells) w.alpha[c.owner] = dist.cdf(c.right) - dist.cdf(c.left);
  return w;
}

// ---------------------------------------------------------------------------
// Empirical and hybrid weights

WeightVector empirical_weights(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                               NeighborSearch mode) {
  require_nonempty(hist, "empirical_weights");
  const auto owner = assign_evaluation_samples(hist, m, theta_n, mode);
  std::vector<std::size_t> counts(hist.size(), 0);
  for (auto k : owner) ++counts[k];
  return normalize_counts(counts, hist.size());
}

std::vector<double> xspace_voronoi_measures_1d(std::span<const Sample> centers, const Distribution& dist) {
  if (centers.empty()) throw InvalidInput("xspace_voronoi_measures_1d: no centers");
  if (dist.dimension() != 1 || !dist.has_cdf()) {
    throw UnsupportedConfiguration("xspace_voronoi_measures_1d: needs a one-dimensional distribution with a CDF");
  }
  std::vector<std::size_t> order(centers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const auto& c : centers) {
    if (c.size() != 1) throw InvalidInput("xspace_voronoi_measures_1d: centers must be one-dimensional");
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return centers[a][0] < centers[b][0]; });
  std::vector<double> sorted(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = centers[order[i]][0];

  const auto groups = value_groups(sorted);
  const auto cb = boundary_cdf(sorted, groups, dist);
  std::vector<double> mass(centers.size(), 0.0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double cell = cb[g + 1] - cb[g];
    const double share = cell / static_cast<double>(groups[g].end - groups[g].begin);
    for (std::size_t i = groups[g].begin; i < groups[g].end; ++i) mass[order[i]] = share;
  }
  return mass;
}

WeightVector exact_hybrid_weights(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                                  const Distribution& dist, NeighborSearch mode) {
  require_nonempty(hist, "exact_hybrid_weights");
  require_exact_support(hist, dist, "exact_hybrid_weights");
  const auto owner = assign_evaluation_samples(hist, m, theta_n, mode);
  const auto& order = hist.order_by_x();
  const auto& xs = hist.sorted_x0();
  const auto groups = value_groups(xs);
  const auto cb = boundary_cdf(xs, groups, dist);

  WeightVector w;
  w.alpha.assign(hist.size(), 0.0);

  // Consecutive Voronoi cells handed to the same record are accumulated as
  // one interval, so a record that absorbs every cell gets exactly
  // cdf(hi) - cdf(lo) = 1.
  bool run_active = false;
  std::size_t run_owner = 0;
  std::size_t run_start = 0;
  auto flush = [&](std::size_t end_group) {
    if (run_active) w.alpha[run_owner] += cb[end_group] - cb[run_start];
    run_active = false;
  };

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::size_t first_owner = owner[order[groups[g].begin]];
    bool uniform = true;
    for (std::size_t i = groups[g].begin + 1; i < groups[g].end; ++i) {
      uniform = uniform && owner[order[i]] == first_owner;
    }
    if (uniform) {
      if (run_active && run_owner == first_owner) continue;
      flush(g);
      run_active = true;
      run_owner = first_owner;
      run_start = g;
      continue;
    }
    flush(g);
    const double share = (cb[g + 1] - cb[g]) / static_cast<double>(groups[g].end - groups[g].begin);
    for (std::size_t i = groups[g].begin; i < groups[g].end; ++i) w.alpha[owner[order[i]]] += share;
  }
  flush(groups.size());
  return w;
}

std::vector<std::size_t> pool_cell_counts(const History& hist, const JointMetric& m, NeighborSearch mode) {
  require_nonempty(hist, "pool_cell_counts");
  const std::size_t n = hist.size();
  const std::size_t pool = hist.pool_size();
  if (pool < n) throw InvalidState("inexact_hybrid_weights: pool shorter than the number of records");
  std::vector<std::size_t> counts(n, 0);

  if (mode == NeighborSearch::naive) {
    for (std::size_t p = 0; p < pool; ++p) {
      const auto sample = hist.pool_sample(p);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const double d = norm_of_difference(m.param_norm, hist.x(i), sample);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      ++counts[best];
    }
    return counts;
  }

  const auto& order = hist.order_by_x();
  const auto& xs = hist.sorted_x0();

  if (hist.d_par() == 1) return hist.pool_cell_counts();

  for (std::size_t p = 0; p < pool; ++p) {
    const auto sample = hist.pool_sample(p);
    const double x0 = sample[0];
    const auto start = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x0) - xs.begin());
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = start; i < n; ++i) {
      if ((xs[i] - x0) * kPruneSlack > best_d) break;
      const double d = norm_of_difference(m.param_norm, hist.x(order[i]), sample);
      if (better(d, order[i], best_d, best)) {
        best_d = d;
        best = order[i];
      }
    }
    for (std::size_t i = start; i-- > 0;) {
      if ((x0 - xs[i]) * kPruneSlack > best_d) break;
      const double d = norm_of_difference(m.param_norm, hist.x(order[i]), sample);
      if (better(d, order[i], best_d, best)) {
        best_d = d;
        best = order[i];
      }
    }
    ++counts[best];
  }
  return counts;
}

WeightVector inexact_hybrid_weights(const History& hist, const JointMetric& m, std::span<const double> theta_n,
                                    NeighborSearch mode) {
  require_nonempty(hist, "inexact_hybrid_weights");
  const auto cell_counts = pool_cell_counts(hist, m, mode);
  const auto owner = assign_evaluation_samples(hist, m, theta_n, mode);
  std::vector<std::size_t> counts(hist.size(), 0);
  for (std::size_t i = 0; i < hist.size(); ++i) counts[owner[i]] += cell_counts[i];
  return normalize_counts(counts, hist.pool_size());
}

WeightVector compute_weights(const WeightStrategy& strategy, const History& hist, const JointMetric& m,
                             std::span<const double> theta_n, const Distribution* dist, NeighborSearch mode) {
  strategy.validate(hist.d_par(), dist);
  switch (strategy.kind) {
    case WeightStrategy::Kind::exact:
      return exact_weights_1d(hist, m, theta_n, *dist);
    case WeightStrategy::Kind::empirical:
      return empirical_weights(hist, m, theta_n, mode);
    case WeightStrategy::Kind::exact_hybrid:
      return exact_hybrid_weights(hist, m, theta_n, *dist, mode);
    case WeightStrategy::Kind::inexact_hybrid:
      return inexact_hybrid_weights(hist, m, theta_n, mode);
  }
  throw ConfigError("compute_weights: unknown strategy");
}

}  // namespace csg
