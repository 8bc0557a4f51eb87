#include "csg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "csg/optimizer.hpp"

namespace csg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kBasePanels = 10000;
constexpr std::size_t kMaxPanels = kBasePanels << 8;

double expect_x(const Distribution& dist, const std::function<double(double)>& h) {
  if (!dist.has_pdf()) throw UnsupportedConfiguration("quadrature needs a one-dimensional density");
  const double lo = dist.support.lower()[0];
  const double hi = dist.support.upper()[0];
  return integrate([&](double x) { return h(x) * dist.pdf_1d(x); }, lo, hi);
}

Design grid_minimiser(const std::function<double(double)>& f, double lo, double hi, double resolution) {
  if (!(resolution > 0.0)) throw InvalidInput("theta_opt_oracle: resolution must be > 0");
  if (!(lo < hi)) return Design{lo};
  auto best_on = [&](double a, double b, std::size_t points) {
    double best_t = a;
    double best_v = f(a);
    for (std::size_t i = 1; i < points; ++i) {
      const double t = i + 1 == points ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
      const double v = f(t);
      if (v < best_v) {
        best_v = v;
        best_t = t;
      }
    }
    return best_t;
  };
  constexpr std::size_t kCoarse = 201;
  constexpr std::size_t kFine = 21;
  double spacing = (hi - lo) / static_cast<double>(kCoarse - 1);
  double best = best_on(lo, hi, kCoarse);
  while (spacing > resolution) {
    const double a = std::max(lo, best - spacing);
    const double b = std::min(hi, best + spacing);
    best = best_on(a, b, kFine);
    spacing = (b - a) / static_cast<double>(kFine - 1);
  }
  return Design{best};
}

}  // namespace

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
  if (panels == 0 || panels % 2 != 0) throw InvalidInput("simpson: panel count must be even and positive");
  const double h = (b - a) / static_cast<double>(panels);
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i < panels; ++i) {
    const double v = f(a + h * static_cast<double>(i));
    (i % 2 == 1 ? odd : even) += v;
  }
  return h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  for (std::size_t n = kBasePanels; n <= kMaxPanels; n *= 2) {
    const double fine = simpson(f, a, b, n);
    const double coarse = simpson(f, a, b, n / 2);
    if (!std::isfinite(fine)) throw NumericError("integrate: non-finite integrand");
    if (std::fabs(fine - coarse) / 15.0 <= tol * std::max(1.0, std::fabs(fine))) return fine;
  }
  throw NumericError("integrate: no convergence within " + std::to_string(kMaxPanels) + " panels");
}

double objective_value(const Problem& p, double theta) {
  if (p.d_des != 1 || p.d_par != 1) throw UnsupportedConfiguration("objective_value: one-dimensional problems only");
  const double t[1] = {theta};
  return expect_x(p.dist, [&](double x) {
    const double xv[1] = {x};
    return p.j(t, xv);
  });
}

double composed_objective_value(const ComposedObjective& c, double theta) {
  if (!c.outer_value) throw UnsupportedConfiguration("composed_objective_value: outer_value is required");
  const double u = objective_value(c.inner, theta);
  const double t[1] = {theta};
  if (!c.y_dist) return c.outer_value(t, {}, u);
  return expect_x(*c.y_dist, [&](double y) {
    const double yv[1] = {y};
    return c.outer_value(t, yv, u);
  });
}

Design theta_opt_oracle(const ComposedObjective& c, double resolution) {
  if (c.inner.d_des != 1) throw UnsupportedConfiguration("theta_opt_oracle: d_des must be 1");
  return grid_minimiser([&](double t) { return composed_objective_value(c, t); }, c.inner.domain.lower()[0],
                        c.inner.domain.upper()[0], resolution);
}

Design theta_opt_oracle(const Problem& p, double resolution) {
  if (p.d_des != 1) throw UnsupportedConfiguration("theta_opt_oracle: d_des must be 1");
  return grid_minimiser([&](double t) { return objective_value(p, t); }, p.domain.lower()[0], p.domain.upper()[0],
                        resolution);
}

Problem make_quadratic_1d() {
  Problem p;
  p.name = "quadratic1d";
  p.domain = BoxDomain({-0.5}, {0.5});
  p.dist = uniform_interval(-0.5, 0.5);
  p.j = [](std::span<const double> t, std::span<const double> x) {
    const double r = x[0] - t[0];
    return 0.5 * r * r;
  };
  p.grad_j = [](std::span<const double> t, std::span<const double> x) { return std::vector<double>{t[0] - x[0]}; };
  p.analytic_J = [](std::span<const double> t) { return 0.5 * t[0] * t[0] + 1.0 / 24.0; };
  p.analytic_gradJ = [](std::span<const double> t) { return std::vector<double>{t[0]}; };
  p.theta_star = Design{0.0};
  return p;
}

double nested_cosine_convexity() {
  const double s = 10.0 * std::sin(1.0 / kPi);
  return 0.6 * s * s;
}

ComposedObjective make_nested_cosine() {
  const double amp = 10.0 * kPi * std::sin(1.0 / kPi);
  Problem inner;
  inner.name = "nested_cosine";
  inner.domain = BoxDomain({0.0}, {10.0});
  inner.dist = uniform_interval(-1.0, 1.0);
  inner.j = [](std::span<const double> t, std::span<const double> x) { return 10.0 * std::cos((t[0] - x[0]) / kPi); };
  inner.grad_j = [](std::span<const double> t, std::span<const double> x) {
    return std::vector<double>{-(10.0 / kPi) * std::sin((t[0] - x[0]) / kPi)};
  };
  inner.analytic_J = [amp](std::span<const double> t) { return amp * std::cos(t[0] / kPi); };
  inner.analytic_gradJ = [amp](std::span<const double> t) {
    return std::vector<double>{-(amp / kPi) * std::sin(t[0] / kPi)};
  };

  ComposedObjective c;
  c.inner = std::move(inner);
  c.y_dist = uniform_interval(-3.0, 3.0);
  c.outer_partial_u = [](std::span<const double> y, double u) { return 0.6 * (2.0 * y[0] + u); };
  c.outer_value = [](std::span<const double>, std::span<const double> y, double u) {
    const double s = 2.0 * y[0] + u;
    return 0.3 * s * s;
  };
  // E[Y^2] = 3 for Y uniform on [-3, 3].
  c.analytic_J = [amp](std::span<const double> t) {
    const double u = amp * std::cos(t[0] / kPi);
    return 0.3 * (12.0 + u * u);
  };
  c.analytic_gradJ = [amp](std::span<const double> t) {
    const double u = amp * std::cos(t[0] / kPi);
    const double du = -(amp / kPi) * std::sin(t[0] / kPi);
    return std::vector<double>{0.6 * u * du};
  };
  c.theta_star = Design{kPi * kPi / 2.0};
  return c;
}

ComposedObjective make_chance_penalty(double lambda, double a) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw ConfigError("chance_penalty: lambda must be > 0");
  if (!(std::isfinite(a) && a > 0.0)) throw ConfigError("chance_penalty: a must be > 0");
  Problem inner;
  inner.name = "chance_penalty";
  inner.domain = BoxDomain({0.0}, {0.75});
  inner.dist = uniform_interval(-1.0, 1.0);
  inner.j = [a](std::span<const double> t, std::span<const double> x) {
    return 0.5 * (std::tanh(a * (t[0] - x[0] * x[0])) + 1.0);
  };
  inner.grad_j = [a](std::span<const double> t, std::span<const double> x) {
    const double c = std::cosh(a * (t[0] - x[0] * x[0]));
    return std::vector<double>{0.5 * a / (c * c)};
  };

  ComposedObjective c;
  c.inner = std::move(inner);
  c.outer_partial_u = [lambda](std::span<const double>, double u) { return lambda * subgradient_max0(u - 0.5); };
  c.outer_partial_theta = [](std::span<const double>, std::span<const double>, double) {
    return std::vector<double>{-1.0};
  };
  c.outer_value = [lambda](std::span<const double> t, std::span<const double>, double u) {
    return -t[0] + lambda * std::max(0.0, u - 0.5);
  };
  return c;
}

}  // namespace csg
