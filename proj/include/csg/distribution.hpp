#pragma once

#include <functional>

#include "csg/random.hpp"
#include "csg/types.hpp"

namespace csg {

/// Probability measure of the random parameter. Only the sampler is needed by
/// the empirical strategies; the exact strategies need the one-dimensional CDF
/// (cell measures are CDF differences). The density is used only by the
/// deterministic quadrature oracle.
struct Distribution {
  enum class Kind { uniform_box, custom };

  Kind kind = Kind::custom;
  BoxDomain support;
  std::function<Sample(Rng&)> sampler;
  std::function<double(double)> cdf_1d;
  std::function<double(double)> pdf_1d;

  std::size_t dimension() const { return support.dimension(); }
  bool has_cdf() const { return static_cast<bool>(cdf_1d) && dimension() == 1; }
  bool has_pdf() const { return static_cast<bool>(pdf_1d) && dimension() == 1; }

  /// Draws one sample and checks that it lies in the support.
  Sample sample(Rng& rng) const;

  /// CDF clamped to the support: exactly 0 at or below the lower end and
  /// exactly 1 at or above the upper end.
  double cdf(double x) const;
};

/// Uniform distribution on a box; CDF and density are provided in one dimension.
Distribution uniform_box(const BoxDomain& support);
inline Distribution uniform_interval(double lo, double hi) { return uniform_box(BoxDomain({lo}, {hi})); }

}  // namespace csg
