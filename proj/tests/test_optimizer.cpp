#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "csg/optimizer.hpp"
#include "csg/problems.hpp"
#include "test_util.hpp"

namespace csg {
namespace {

using test::scripted;

Problem quadratic_with_samples(std::vector<std::vector<double>> xs) {
  Problem p = make_quadratic_1d();
  p.dist = scripted(p.domain, std::move(xs));
  return p;
}

/// j(theta, x) = c * theta, so every gradient sample equals c.
Problem linear_problem(double c) {
  Problem p = make_quadratic_1d();
  p.j = [c](std::span<const double> t, std::span<const double>) { return c * t[0]; };
  p.grad_j = [c](std::span<const double>, std::span<const double>) { return std::vector<double>{c}; };
  return p;
}

TEST(CsgStep, SingleRecordStepsOntoTheSample) {
  const Problem p = quadratic_with_samples({{0.3}});
  CsgState st = make_csg_state(p, Design{0.1}, make_rng(0));
  csg_step(st, p, WeightStrategy::exact(), StepSchedule::constant(1.0), JointMetric{});
  EXPECT_EQ(st.weights.alpha, std::vector<double>{1.0});
  EXPECT_NEAR(st.ghat[0], -0.2, 1e-15);
  EXPECT_NEAR(st.theta[0], 0.3, 1e-15);
  EXPECT_EQ(st.n, 1u);
  EXPECT_EQ(st.grad_evals, 1u);
}

TEST(CsgStep, ZeroStepKeepsTheDesign) {
  const Problem p = quadratic_with_samples({{0.3}});
  CsgState st = make_csg_state(p, Design{0.1}, make_rng(0));
  csg_step(st, p, WeightStrategy::empirical(), 0.0, JointMetric{});
  EXPECT_EQ(st.theta[0], 0.1);
  EXPECT_EQ(st.history.size(), 1u);
}

TEST(CsgStep, ProjectionIsActiveAtTheBoundary) {
  const Problem p = linear_problem(-0.2);
  CsgState st = make_csg_state(p, Design{0.45}, make_rng(0));
  csg_step(st, p, WeightStrategy::exact_hybrid(), 1.0, JointMetric{});
  EXPECT_EQ(st.theta[0], 0.5);
}

TEST(CsgStep, InvalidStepLengthIsRejected) {
  const Problem p = make_quadratic_1d();
  CsgState st = make_csg_state(p, Design{0.0}, make_rng(0));
  EXPECT_THROW(csg_step(st, p, WeightStrategy::empirical(), -1.0, JointMetric{}), InvalidInput);
  EXPECT_THROW(csg_step(st, p, WeightStrategy::empirical(), std::nan(""), JointMetric{}), InvalidInput);
}

TEST(CsgStep, StartOutsideDomainIsRejected) {
  const Problem p = make_quadratic_1d();
  EXPECT_THROW(make_csg_state(p, Design{0.7}, make_rng(0)), InvalidInput);
  EXPECT_THROW(make_csg_state(p, Design{0.1, 0.1}, make_rng(0)), InvalidInput);
}

TEST(CsgStep, NonFiniteGradientIsNumericErrorWithIteration) {
  Problem p = make_quadratic_1d();
  p.grad_j = [](std::span<const double>, std::span<const double>) {
    return std::vector<double>{std::numeric_limits<double>::infinity()};
  };
  CsgState st = make_csg_state(p, Design{0.0}, make_rng(0));
  try {
    csg_step(st, p, WeightStrategy::empirical(), 1.0, JointMetric{});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos);
  }
}

TEST(CsgStep, InexactHybridGrowsThePoolAndCountsDraws) {
  const Problem p = make_quadratic_1d();
  const WeightStrategy s = WeightStrategy::inexact_hybrid(1.5);
  CsgState st = make_csg_state(p, Design{0.2}, make_rng(3));
  for (std::size_t n = 1; n <= 50; ++n) {
    csg_step(st, p, s, StepSchedule::constant(1.0), JointMetric{});
    ASSERT_EQ(st.history.pool_size(), static_cast<std::size_t>(std::floor(std::pow(n, 1.5))));
    ASSERT_EQ(st.sample_draws, st.history.pool_size());
    ASSERT_EQ(st.grad_evals, n);
    ASSERT_NEAR(st.weights.sum(), 1.0, 1e-12);
  }
}

TEST(CsgStep, AggregatesAreWeightedSumsOfTheHistory) {
  const Problem p = make_quadratic_1d();
  CsgState st = make_csg_state(p, Design{-0.3}, make_rng(4));
  for (int n = 0; n < 30; ++n) {
    const double theta_before = st.theta[0];
    csg_step(st, p, WeightStrategy::exact(), StepSchedule::power(1.0, 0.5), JointMetric{});
    double g = 0.0;
    double j = 0.0;
    for (std::size_t k = 0; k < st.history.size(); ++k) {
      g += st.weights[k] * st.history.grad(k)[0];
      j += st.weights[k] * st.history.jval(k);
    }
    EXPECT_NEAR(st.ghat[0], g, 1e-15);
    EXPECT_NEAR(st.jhat, j, 1e-15);
    EXPECT_EQ(st.history.theta(st.history.size() - 1)[0], theta_before);
  }
}

TEST(ComposedStep, IdentityOuterMatchesPlainStep) {
  const Problem p = make_quadratic_1d();
  const ComposedObjective c = identity_composition(p);
  for (const auto& s : {WeightStrategy::exact(), WeightStrategy::empirical(), WeightStrategy::exact_hybrid(),
                        WeightStrategy::inexact_hybrid(1.5)}) {
    CsgState a = make_csg_state(p, Design{0.4}, make_rng(9));
    CsgState b = make_csg_state(c, Design{0.4}, make_rng(9));
    for (int n = 0; n < 40; ++n) {
      csg_step(a, p, s, StepSchedule::power(1.0, 2.0 / 3.0), JointMetric{});
      csg_step_composed(b, c, s, StepSchedule::power(1.0, 2.0 / 3.0), JointMetric{});
      ASSERT_EQ(a.theta, b.theta) << to_string(s);
      ASSERT_EQ(a.direction, b.direction);
    }
  }
}

TEST(ComposedStep, NestedCosineFirstDirectionByHand) {
  ComposedObjective c = make_nested_cosine();
  c.inner.dist = scripted(c.inner.dist.support, {{0.0}});
  c.y_dist = scripted(c.y_dist->support, {{0.0}});
  CsgState st = make_csg_state(c, Design{6.0}, make_rng(0));
  csg_step_composed(st, c, WeightStrategy::exact_hybrid(), kNestedCosineStep, JointMetric{});

  const double pi = std::numbers::pi;
  const double jhat = 10.0 * std::cos(6.0 / pi);
  const double ghat = -(10.0 / pi) * std::sin(6.0 / pi);
  const double expected = 0.6 * (2.0 * 0.0 + jhat) * ghat;
  EXPECT_NEAR(st.jhat, jhat, 1e-13);
  EXPECT_NEAR(st.ghat[0], ghat, 1e-13);
  EXPECT_NEAR(st.direction[0], expected, 1e-12);
  EXPECT_NEAR(st.direction[0], 5.991, 1e-3);
  EXPECT_NEAR(st.theta[0], 6.0 - expected / 30.0, 1e-12);
  EXPECT_EQ(st.y_weights.alpha, std::vector<double>{1.0});
  EXPECT_EQ(st.sample_draws, 2u);
}

TEST(ComposedStep, ZeroOuterDerivativeFreezesTheDesign) {
  ComposedObjective c = make_nested_cosine();
  c.outer_partial_u = [](std::span<const double>, double) { return 0.0; };
  CsgState st = make_csg_state(c, Design{7.0}, make_rng(1));
  for (int n = 0; n < 10; ++n) {
    csg_step_composed(st, c, WeightStrategy::empirical(), 1.0, JointMetric{});
    EXPECT_EQ(st.direction, std::vector<double>{0.0});
    EXPECT_EQ(st.theta[0], 7.0);
  }
}

TEST(ComposedStep, ChancePenaltyUsesThetaPartial) {
  const ComposedObjective c = make_chance_penalty(3.0, 25.0);
  CsgState st = make_csg_state(c, Design{0.0}, make_rng(2));
  csg_step_composed(st, c, WeightStrategy::exact_hybrid(), 1.0, JointMetric{});
  // At theta = 0 the inner value is below 1/2, so only -theta contributes.
  ASSERT_LT(st.jhat, 0.5);
  EXPECT_EQ(st.direction, std::vector<double>{-1.0});
  EXPECT_EQ(st.theta[0], 0.75);
}

TEST(ComposedDirection, WeightedOuterDerivatives) {
  ComposedObjective c = make_nested_cosine();
  History yh(1, 1);
  const double t[1] = {6.0};
  const double z[1] = {0.0};
  for (double y : {-1.0, 2.0}) yh.append_record(t, yh.append_pool_sample(Sample{y}), z, 0.0);
  const WeightVector w{{0.25, 0.75}};
  const std::vector<double> ghat = {2.0};
  const auto dir = composed_direction(c, std::vector<double>{6.0}, &yh, &w, 1.5, ghat);
  const double coef = 0.25 * 0.6 * (-2.0 + 1.5) + 0.75 * 0.6 * (4.0 + 1.5);
  EXPECT_NEAR(dir[0], coef * 2.0, 1e-14);
}

TEST(Stationarity, HandEvaluatedCases) {
  const BoxDomain box({-0.5}, {0.5});
  EXPECT_EQ(stationarity_measure(std::vector<double>{0.0}, std::vector<double>{0.0}, 1.0, box), 0.0);
  EXPECT_EQ(stationarity_measure(std::vector<double>{0.5}, std::vector<double>{-1.0}, 1.0, box), 0.0);
  EXPECT_NEAR(stationarity_measure(std::vector<double>{0.0}, std::vector<double>{0.2}, 1.0, box), 0.2, 1e-16);
  EXPECT_THROW(stationarity_measure(std::vector<double>{0.0}, std::vector<double>{0.2}, 0.0, box), InvalidInput);
}

TEST(Subgradient, ZeroAtTheKink) {
  EXPECT_EQ(subgradient_max0(-0.3), 0.0);
  EXPECT_EQ(subgradient_max0(0.3), 1.0);
  EXPECT_EQ(subgradient_max0(0.0), 0.0);
}

TEST(RunCsg, ZeroIterationsGiveOnlyTheStart) {
  StoppingRule stop;
  stop.max_iters = 0;
  const auto tr = run_csg(make_quadratic_1d(), Design{0.3}, WeightStrategy::exact(), StepSchedule::constant(1.0),
                          JointMetric{}, stop, make_rng(0));
  ASSERT_EQ(tr.rows.size(), 1u);
  EXPECT_EQ(tr.rows[0].iteration, 0u);
  EXPECT_EQ(tr.rows[0].theta, std::vector<double>{0.3});
  EXPECT_NEAR(tr.rows[0].abs_error, 0.3, 1e-16);
  EXPECT_TRUE(std::isnan(tr.rows[0].jhat));
}

TEST(RunCsg, InfiniteToleranceStopsAfterOneStep) {
  StoppingRule stop;
  stop.stationarity_tol = std::numeric_limits<double>::infinity();
  const auto tr = run_csg(make_quadratic_1d(), Design{0.3}, WeightStrategy::exact(), StepSchedule::constant(1.0),
                          JointMetric{}, stop, make_rng(0));
  EXPECT_EQ(tr.rows.size(), 2u);
  EXPECT_TRUE(tr.ok());
}

TEST(RunCsg, TraceRowsDescribeEachStep) {
  const Problem p = make_quadratic_1d();
  StoppingRule stop;
  stop.max_iters = 25;
  std::vector<CsgState> states;
  const auto tr = run_csg(p, Design{-0.4}, WeightStrategy::exact(), StepSchedule::power(1.0, 2.0 / 3.0),
                          JointMetric{}, stop, make_rng(6), {}, [&](const CsgState& s) { states.push_back(s); });
  ASSERT_EQ(tr.rows.size(), 26u);
  ASSERT_EQ(states.size(), 25u);
  for (std::size_t n = 1; n <= 25; ++n) {
    const TraceRow& row = tr.rows[n];
    const CsgState& st = states[n - 1];
    const double before = tr.rows[n - 1].theta[0];
    EXPECT_EQ(row.iteration, n);
    EXPECT_EQ(row.theta[0], st.theta[0]);
    EXPECT_EQ(row.abs_error, std::fabs(st.theta[0]));
    EXPECT_EQ(row.jhat, st.jhat);
    EXPECT_NEAR(row.grad_error, std::fabs(st.ghat[0] - before), 1e-15);
    EXPECT_NEAR(row.obj_error, std::fabs(st.jhat - (0.5 * before * before + 1.0 / 24.0)), 1e-15);
    EXPECT_NEAR(row.stationarity,
                std::fabs(std::clamp(before - st.ghat[0], -0.5, 0.5) - before), 1e-15);
    EXPECT_EQ(row.grad_evals, n);
    EXPECT_EQ(row.sample_draws, n);
    EXPECT_EQ(row.weight_time_ns, 0);
  }
}

TEST(RunCsg, FailureKeepsThePartialTrace) {
  Problem p = make_quadratic_1d();
  auto calls = std::make_shared<int>(0);
  p.grad_j = [calls](std::span<const double> t, std::span<const double> x) {
    return std::vector<double>{++*calls >= 5 ? std::nan("") : t[0] - x[0]};
  };
  StoppingRule stop;
  stop.max_iters = 10;
  const auto tr = run_csg(p, Design{0.0}, WeightStrategy::empirical(), StepSchedule::constant(1.0), JointMetric{},
                          stop, make_rng(0));
  EXPECT_FALSE(tr.ok());
  EXPECT_EQ(tr.rows.size(), 5u);
  EXPECT_NE(tr.failure->find("iteration 5"), std::string::npos);
}

TEST(RunCsg, SeededRunsAreReproducibleAndFeasible) {
  const Problem p = make_quadratic_1d();
  StoppingRule stop;
  stop.max_iters = 300;
  for (const auto& s : {WeightStrategy::exact(), WeightStrategy::inexact_hybrid(1.3)}) {
    const auto a = run_csg(p, s, StepSchedule::constant(1.0), JointMetric{}, stop, 77);
    const auto b = run_csg(p, s, StepSchedule::constant(1.0), JointMetric{}, stop, 77);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      ASSERT_EQ(a.rows[i].theta, b.rows[i].theta);
      if (i > 0) ASSERT_EQ(a.rows[i].jhat, b.rows[i].jhat) << i;
      ASSERT_TRUE(p.domain.contains(a.rows[i].theta));
    }
  }
}

TEST(RunCsg, ComposedIteratesStayFeasibleWithLargeSteps) {
  const ComposedObjective c = make_nested_cosine();
  StoppingRule stop;
  stop.max_iters = 200;
  const auto tr = run_csg(c, Design{9.0}, WeightStrategy::empirical(), StepSchedule::constant(5.0), JointMetric{},
                          stop, make_rng(8));
  ASSERT_TRUE(tr.ok());
  for (const auto& row : tr.rows) ASSERT_TRUE(c.inner.domain.contains(row.theta));
}

TEST(RunCsg, ExactWeightsMedianErrorDecreasesOnQuadratic) {
  const Problem p = make_quadratic_1d();
  StoppingRule stop;
  stop.max_iters = 500;
  std::vector<double> early;
  std::vector<double> late;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto tr = run_csg(p, WeightStrategy::exact(), StepSchedule::constant(1.0), JointMetric{}, stop, seed);
    early.push_back(tr.rows[10].abs_error);
    late.push_back(tr.rows[500].abs_error);
  }
  std::nth_element(early.begin(), early.begin() + 20, early.end());
  std::nth_element(late.begin(), late.begin() + 20, late.end());
  EXPECT_LT(late[20], early[20]);
}

TEST(RunCsg, InvalidConfigurationsAreRejectedUpFront) {
  const Problem p = make_quadratic_1d();
  StoppingRule stop;
  stop.stationarity_t = 0.0;
  EXPECT_THROW(run_csg(p, Design{0.0}, WeightStrategy::exact(), StepSchedule::constant(1.0), JointMetric{}, stop,
                       make_rng(0)),
               ConfigError);
  EXPECT_THROW(run_csg(p, Design{0.0}, WeightStrategy::inexact_hybrid(0.9), StepSchedule::constant(1.0),
                       JointMetric{}, StoppingRule{}, make_rng(0)),
               ConfigError);
  EXPECT_THROW(run_csg(p, Design{0.0}, WeightStrategy::exact(), StepSchedule::constant(1.0),
                       JointMetric{1.0, 0.0, Norm::one, Norm::one}, StoppingRule{}, make_rng(0)),
               ConfigError);
}

}  // namespace
}  // namespace csg
