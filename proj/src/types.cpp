#include "csg/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace csg {

Norm parse_norm(std::string_view name) {
  if (name == "one" || name == "1") return Norm::one;
  if (name == "two" || name == "2") return Norm::two;
  if (name == "inf") return Norm::inf;
  throw ConfigError("unknown norm '" + std::string(name) + "' (expected one, two or inf)");
}

std::string_view to_string(Norm norm) {
  switch (norm) {
    case Norm::one:
      return "one";
    case Norm::two:
      return "two";
    case Norm::inf:
      return "inf";
  }
  return "one";
}

double norm_of_difference_nd(Norm norm, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("norm_of_difference: length mismatch (" + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  }
  if (a.size() == 1) return std::fabs(a[0] - b[0]);
  double acc = 0.0;
  switch (norm) {
    case Norm::one:
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
      return acc;
    case Norm::two:
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
      }
      return std::sqrt(acc);
    case Norm::inf:
      for (std::size_t i = 0; i < a.size(); ++i) acc = std::max(acc, std::fabs(a[i] - b[i]));
      return acc;
  }
  return acc;
}

double euclidean_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double c : v) acc += c * c;
  return std::sqrt(acc);
}

BoxDomain::BoxDomain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) throw InvalidInput("BoxDomain: lower/upper length mismatch");
  if (lower_.empty()) throw InvalidInput("BoxDomain: dimension must be at least 1");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || lower_[i] > upper_[i]) {
      throw InvalidInput("BoxDomain: bounds must be finite with lower <= upper (coordinate " + std::to_string(i) +
                         ")");
    }
  }
}

BoxDomain BoxDomain::cube(std::size_t dim, double lo, double hi) {
  return BoxDomain(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
}

bool BoxDomain::contains(std::span<const double> v) const {
  if (v.size() != lower_.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= lower_[i] && v[i] <= upper_[i])) return false;
  }
  return true;
}

bool BoxDomain::subset_of(const BoxDomain& outer) const {
  if (outer.dimension() != dimension()) return false;
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (lower_[i] < outer.lower_[i] || upper_[i] > outer.upper_[i]) return false;
  }
  return true;
}

double BoxDomain::diameter_inf() const {
  double d = 0.0;
  for (std::size_t i = 0; i < lower_.size(); ++i) d = std::max(d, upper_[i] - lower_[i]);
  return d;
}

Design project_box(const BoxDomain& box, std::span<const double> v) {
  if (v.size() != box.dimension()) {
    throw InvalidInput("project_box: vector length " + std::to_string(v.size()) + " does not match box dimension " +
                       std::to_string(box.dimension()));
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i], box.lower()[i], box.upper()[i]);
  return Design(std::move(out));
}

void JointMetric::validate() const {
  if (!(std::isfinite(a1) && a1 >= 0.0)) throw ConfigError("JointMetric: a1 must be finite and >= 0");
  if (!(std::isfinite(a2) && a2 > 0.0)) throw ConfigError("JointMetric: a2 must be finite and > 0");
}

double metric_distance(const JointMetric& m, std::span<const double> theta1, std::span<const double> x1,
                       std::span<const double> theta2, std::span<const double> x2) {
  // The weight module reproduces this exact expression tree; keep them in sync.
  return m.a1 * norm_of_difference(m.design_norm, theta1, theta2) +
         m.a2 * norm_of_difference(m.param_norm, x1, x2);
}

}  // namespace csg
