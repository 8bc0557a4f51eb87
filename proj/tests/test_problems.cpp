#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "csg/optimizer.hpp"
#include "csg/problems.hpp"

namespace csg {
namespace {

constexpr double kPi = std::numbers::pi;

/// Central difference of f at t with step h.
template <class F>
double central_difference(F&& f, double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

void check_gradient_samples(const Problem& p, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const double lo = p.domain.lower()[0];
  const double hi = p.domain.upper()[0];
  for (int i = 0; i < 100; ++i) {
    const double t = uniform_in(rng, lo, hi);
    const Sample x = p.dist.sample(rng);
    const double fd = central_difference([&](double s) { return p.j(std::vector<double>{s}, x.view()); }, t, 1e-6);
    const double g = p.grad_j(std::vector<double>{t}, x.view())[0];
    EXPECT_NEAR(g, fd, 1e-5 * std::max(1.0, std::fabs(g))) << p.name << " at theta=" << t << " x=" << x[0];
  }
}

TEST(Quadratic, HandEvaluatedValues) {
  const Problem p = make_quadratic_1d();
  EXPECT_NEAR(p.j(std::vector<double>{0.1}, std::vector<double>{0.3}), 0.02, 1e-16);
  EXPECT_EQ(p.analytic_gradJ(std::vector<double>{0.25})[0], 0.25);
  EXPECT_EQ(*p.theta_star, Design{0.0});
  EXPECT_NO_THROW(p.validate());
}

TEST(Quadratic, AnalyticObjectiveMatchesQuadrature) {
  const Problem p = make_quadratic_1d();
  for (double t : {-0.5, -0.1, 0.0, 0.3}) {
    EXPECT_NEAR(objective_value(p, t), p.analytic_J(std::vector<double>{t}), 1e-12);
  }
}

TEST(NestedCosine, OptimumAndInnerMean) {
  const ComposedObjective c = make_nested_cosine();
  EXPECT_NEAR((*c.theta_star)[0], 4.9348, 1e-4);
  const double ts = kPi * kPi / 2.0;
  const double inner = integrate([&](double x) { return 0.5 * c.inner.j(std::vector<double>{ts}, std::vector<double>{x}); },
                                 -1.0, 1.0);
  EXPECT_NEAR(inner, 0.0, 1e-10);
  EXPECT_EQ(c.outer_value(std::vector<double>{ts}, std::vector<double>{0.0}, 0.0), 0.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(NestedCosine, AnalyticValuesMatchQuadrature) {
  const ComposedObjective c = make_nested_cosine();
  for (double t : {0.0, 2.5, kPi * kPi / 2.0, 8.0, 10.0}) {
    const std::vector<double> th = {t};
    const double inner = integrate([&](double x) { return 0.5 * c.inner.j(th, std::vector<double>{x}); }, -1.0, 1.0);
    EXPECT_NEAR(c.inner.analytic_J(th), inner, 1e-10);
    EXPECT_NEAR(composed_objective_value(c, t), c.analytic_J(th), 1e-9);
  }
}

TEST(NestedCosine, ConvexityModulusIsTheCurvatureAtTheOptimum) {
  const ComposedObjective c = make_nested_cosine();
  const double ts = kPi * kPi / 2.0;
  const double h = 1e-4;
  const auto J = [&](double t) { return c.analytic_J(std::vector<double>{t}); };
  const double curvature = (J(ts + h) - 2.0 * J(ts) + J(ts - h)) / (h * h);
  EXPECT_NEAR(nested_cosine_convexity(), curvature, 1e-5);
}

TEST(ChancePenalty, InvalidParametersAreConfigErrors) {
  EXPECT_THROW(make_chance_penalty(0.0, 25.0), ConfigError);
  EXPECT_THROW(make_chance_penalty(3.0, -1.0), ConfigError);
  EXPECT_THROW(make_chance_penalty(std::nan(""), 25.0), ConfigError);
  EXPECT_NO_THROW(make_chance_penalty(3.0, 25.0).validate());
}

TEST(ChancePenalty, InnerFunctionAtZeroIsBelowOneHalf) {
  const ComposedObjective c = make_chance_penalty(3.0, 25.0);
  EXPECT_LT(objective_value(c.inner, 0.0), 0.5);
}

TEST(ChancePenalty, InnerFunctionIsMonotone) {
  const ComposedObjective c = make_chance_penalty(3.0, 25.0);
  Rng rng = make_rng(40);
  for (int i = 0; i < 200; ++i) {
    double a = uniform_in(rng, 0.0, 0.75);
    double b = uniform_in(rng, 0.0, 0.75);
    if (a > b) std::swap(a, b);
    const Sample x = c.inner.dist.sample(rng);
    EXPECT_LE(c.inner.j(std::vector<double>{a}, x.view()), c.inner.j(std::vector<double>{b}, x.view()));
    if (i < 20) EXPECT_LE(objective_value(c.inner, a), objective_value(c.inner, b) + 1e-12);
  }
}

TEST(ChancePenalty, SharpSmoothingApproachesTheExactConstraint) {
  // P(theta - X^2 >= 0) = sqrt(theta) for X uniform on [-1, 1].
  const ComposedObjective c = make_chance_penalty(3.0, 1e4);
  for (double t : {0.04, 0.25, 0.49}) EXPECT_NEAR(objective_value(c.inner, t), std::sqrt(t), 2e-3);
}

TEST(Problems, GradientSamplesMatchFiniteDifferences) {
  check_gradient_samples(make_quadratic_1d(), 41);
  check_gradient_samples(make_nested_cosine().inner, 42);
  check_gradient_samples(make_chance_penalty(3.0, 25.0).inner, 43);
}

TEST(Problems, AnalyticGradientsMatchFiniteDifferences) {
  Rng rng = make_rng(44);
  const Problem q = make_quadratic_1d();
  const ComposedObjective nc = make_nested_cosine();
  for (int i = 0; i < 100; ++i) {
    const double t = uniform_in(rng, -0.5, 0.5);
    EXPECT_NEAR(q.analytic_gradJ(std::vector<double>{t})[0],
                central_difference([&](double s) { return q.analytic_J(std::vector<double>{s}); }, t, 1e-6), 1e-6);
    const double u = uniform_in(rng, 0.0, 10.0);
    EXPECT_NEAR(nc.analytic_gradJ(std::vector<double>{u})[0],
                central_difference([&](double s) { return nc.analytic_J(std::vector<double>{s}); }, u, 1e-6), 1e-5);
    EXPECT_NEAR(nc.inner.analytic_gradJ(std::vector<double>{u})[0],
                central_difference([&](double s) { return nc.inner.analytic_J(std::vector<double>{s}); }, u, 1e-6),
                1e-5);
  }
}

TEST(Quadrature, SimpsonAndIntegrate) {
  EXPECT_NEAR(simpson([](double x) { return x * x * x; }, 0.0, 2.0, 2), 4.0, 1e-14);
  EXPECT_NEAR(integrate([](double x) { return std::exp(x); }, 0.0, 1.0), std::exp(1.0) - 1.0, 1e-12);
  EXPECT_THROW(simpson([](double x) { return x; }, 0.0, 1.0, 3), InvalidInput);
  EXPECT_THROW(integrate([](double x) { return x < 0.3 ? 0.0 : 1.0; }, 0.0, 1.0, 1e-15), NumericError);
}

TEST(Oracle, QuadraticOptimumIsZero) {
  EXPECT_NEAR(theta_opt_oracle(make_quadratic_1d(), 1e-6)[0], 0.0, 1e-6);
}

TEST(Oracle, NestedCosineOptimum) {
  EXPECT_NEAR(theta_opt_oracle(make_nested_cosine(), 1e-5)[0], kPi * kPi / 2.0, 1e-4);
}

TEST(Oracle, ChancePenaltyOptimumNearOneQuarter) {
  EXPECT_LT(std::fabs(theta_opt_oracle(make_chance_penalty(3.0, 25.0), 1e-6)[0] - 0.25), 1.5e-3);
}

}  // namespace
}  // namespace csg
