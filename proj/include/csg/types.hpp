#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "csg/errors.hpp"

namespace csg {

/// Dense real vector tagged with the space it lives in, so designs and
/// random-parameter samples cannot be mixed up at call sites.
template <class Tag>
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {}
  Point(std::initializer_list<double> coords) : coords_(coords) {}
  explicit Point(std::span<const double> coords) : coords_(coords.begin(), coords.end()) {}

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }

  std::span<const double> view() const { return coords_; }
  std::span<double> view() { return coords_; }
  const std::vector<double>& coords() const { return coords_; }

  auto begin() const { return coords_.begin(); }
  auto end() const { return coords_.end(); }

  bool operator==(const Point&) const = default;

 private:
  std::vector<double> coords_;
};

struct DesignTag {};
struct SampleTag {};

/// Decision variables theta in the admissible design set.
using Design = Point<DesignTag>;
/// One realization x of the random parameter.
using Sample = Point<SampleTag>;

enum class Norm { one, two, inf };

Norm parse_norm(std::string_view name);
std::string_view to_string(Norm norm);

double norm_of_difference_nd(Norm norm, std::span<const double> a, std::span<const double> b);

/// ||a - b|| in the given norm (|a - b| for scalars, whatever the norm).
/// Throws InvalidInput on length mismatch.
inline double norm_of_difference(Norm norm, std::span<const double> a, std::span<const double> b) {
  if (a.size() == 1 && b.size() == 1) return std::fabs(a[0] - b[0]);
  return norm_of_difference_nd(norm, a, b);
}

/// Euclidean norm of a vector.
double euclidean_norm(std::span<const double> v);

/// Axis-aligned box {v : lower <= v <= upper}; the admissible design set and
/// the support of the built-in distributions.
class BoxDomain {
 public:
  BoxDomain() = default;
  BoxDomain(std::vector<double> lower, std::vector<double> upper);

  /// Box [lo, hi]^dim.
  static BoxDomain cube(std::size_t dim, double lo, double hi);

  std::size_t dimension() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  bool contains(std::span<const double> v) const;
  /// True iff this box lies inside `outer`.
  bool subset_of(const BoxDomain& outer) const;
  /// Largest edge length.
  double diameter_inf() const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Euclidean orthogonal projection onto the box (componentwise clamp).
Design project_box(const BoxDomain& box, std::span<const double> v);
inline Design project_box(const BoxDomain& box, const Design& v) { return project_box(box, v.view()); }

/// Joint distance on designs x samples:
///   d((t, x), (t', x')) = a1 * ||t - t'|| + a2 * ||x - x'||.
/// a1 = 0 is accepted (pure parameter-space pseudometric); a2 must be positive.
struct JointMetric {
  double a1 = 1.0;
  double a2 = 1.0;
  Norm design_norm = Norm::one;
  Norm param_norm = Norm::one;

  void validate() const;
};

double metric_distance(const JointMetric& m, std::span<const double> theta1, std::span<const double> x1,
                       std::span<const double> theta2, std::span<const double> x2);

inline double metric_distance(const JointMetric& m, const Design& theta1, const Sample& x1, const Design& theta2,
                              const Sample& x2) {
  return metric_distance(m, theta1.view(), x1.view(), theta2.view(), x2.view());
}

}  // namespace csg
