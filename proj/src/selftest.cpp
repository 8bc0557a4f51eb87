#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "csg/harness.hpp"
#include "csg/problems.hpp"

namespace csg {

namespace {

History random_history(Rng& rng, std::size_t n, const Distribution& dist, double beta) {
  History h(1, 1);
  const WeightStrategy s = WeightStrategy::inexact_hybrid(beta);
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t count = s.pool_target(k) - s.pool_target(k - 1);
    std::vector<Sample> batch;
    for (std::size_t i = 0; i < count; ++i) batch.push_back(dist.sample(rng));
    const std::size_t idx = h.append_pool_samples(batch);
    const double theta[1] = {uniform_in(rng, -0.5, 0.5)};
    const double grad[1] = {uniform_in(rng, -1.0, 1.0)};
    h.append_record(theta, idx, grad, uniform01(rng));
  }
  return h;
}

}  // namespace

int run_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, const std::function<bool()>& body) {
    bool ok = false;
    std::string detail;
    try {
      ok = body();
    } catch (const std::exception& e) {
      detail = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "PASS " : "FAIL ") << name << detail << '\n';
    if (!ok) ++failures;
  };

  check("metric symmetry and triangle inequality", [] {
    Rng rng = make_rng(11);
    const JointMetric m{1.3, 0.7, Norm::two, Norm::inf};
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> p[3][2];
      for (auto& pair : p) {
        for (auto& v : pair) {
          v = {uniform_in(rng, -1, 1), uniform_in(rng, -1, 1)};
        }
      }
      const double ab = metric_distance(m, p[0][0], p[0][1], p[1][0], p[1][1]);
      const double ba = metric_distance(m, p[1][0], p[1][1], p[0][0], p[0][1]);
      const double bc = metric_distance(m, p[1][0], p[1][1], p[2][0], p[2][1]);
      const double ac = metric_distance(m, p[0][0], p[0][1], p[2][0], p[2][1]);
      if (ab != ba || ac > ab + bc + 1e-12) return false;
    }
    return true;
  });

  check("projection nonexpansive and idempotent", [] {
    Rng rng = make_rng(12);
    const BoxDomain box({-0.5, 0.0}, {0.5, 1.0});
    for (int t = 0; t < 1000; ++t) {
      const std::vector<double> a = {uniform_in(rng, -2, 2), uniform_in(rng, -2, 2)};
      const std::vector<double> b = {uniform_in(rng, -2, 2), uniform_in(rng, -2, 2)};
      const Design pa = project_box(box, a);
      const Design pb = project_box(box, b);
      const double d_in = std::hypot(a[0] - b[0], a[1] - b[1]);
      const double d_out = std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
      if (d_out > d_in + 1e-15 || !(project_box(box, pa) == pa)) return false;
    }
    return true;
  });

  check("weights are nonnegative and sum to one", [] {
    Rng rng = make_rng(13);
    const Distribution dist = uniform_interval(-0.5, 0.5);
    const JointMetric m;
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = 1 + uniform_index(rng, 100);
      const History h = random_history(rng, n, dist, 1.5);
      const auto theta = h.theta(n - 1);
      for (const auto& s : {WeightStrategy::exact(), WeightStrategy::empirical(), WeightStrategy::exact_hybrid(),
                            WeightStrategy::inexact_hybrid(1.5)}) {
        const WeightVector w = compute_weights(s, h, m, theta, &dist);
        for (double a : w.alpha) {
          if (a < 0.0) return false;
        }
        if (std::fabs(w.sum() - 1.0) > 1e-12) return false;
      }
    }
    return true;
  });

  check("indexed and naive neighbour search agree", [] {
    Rng rng = make_rng(14);
    const Distribution dist = uniform_interval(-0.5, 0.5);
    const JointMetric m{0.8, 1.1, Norm::one, Norm::one};
    for (int t = 0; t < 30; ++t) {
      const History h = random_history(rng, 1 + uniform_index(rng, 80), dist, 1.7);
      const auto theta = h.theta(h.size() - 1);
      for (const auto& s : {WeightStrategy::empirical(), WeightStrategy::exact_hybrid(),
                            WeightStrategy::inexact_hybrid(1.7)}) {
        const auto a = compute_weights(s, h, m, theta, &dist, NeighborSearch::indexed);
        const auto b = compute_weights(s, h, m, theta, &dist, NeighborSearch::naive);
        if (a.alpha != b.alpha) return false;
      }
    }
    return true;
  });

  check("admissible schedule stays in its band", [] {
    const StepSchedule s = StepSchedule::admissible(0.5, 2.0, 0.1, 1);
    for (std::size_t n = 1; n <= 100000; ++n) {
      const double tau = s.step(n);
      if (tau < s.lower_bound(n) * (1 - 1e-12) || tau > s.upper_bound(n) * (1 + 1e-12)) return false;
    }
    return true;
  });

  check("seeded runs are reproducible and feasible", [] {
    const Problem p = make_quadratic_1d();
    StoppingRule stop;
    stop.max_iters = 200;
    const auto a = run_csg(p, WeightStrategy::exact_hybrid(), StepSchedule::constant(1.0), JointMetric{}, stop, 5);
    const auto b = run_csg(p, WeightStrategy::exact_hybrid(), StepSchedule::constant(1.0), JointMetric{}, stop, 5);
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      if (a.rows[i].theta != b.rows[i].theta || !p.domain.contains(a.rows[i].theta)) return false;
    }
    return true;
  });

  return failures;
}

}  // namespace csg
