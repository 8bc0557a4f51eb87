#pragma once

#include <cstddef>

namespace csg {

/// Step-length sequence tau_n, n = 1, 2, ...
///
///  - constant:   tau_n = c
///  - power:      tau_n = c * n^(-p)
///  - admissible: tau_n = c * n^(-p), with every emitted value checked against
///                S_lower / n <= tau_n <= S_upper * n^(-1 + 1/max(d_par, 2) - D)
///                and D in (0, 1/max(d_par, 2)).
class StepSchedule {
 public:
  enum class Kind { constant, power, admissible };

  static StepSchedule constant(double c);
  static StepSchedule power(double c, double p);
  /// The largest admissible sequence: c = S_upper, p = 1 - 1/max(d_par, 2) + D.
  static StepSchedule admissible(double s_lower, double s_upper, double d, std::size_t d_par);
  /// An explicit power law that must stay inside the admissible band.
  static StepSchedule admissible(double c, double p, double s_lower, double s_upper, double d, std::size_t d_par);

  Kind kind() const { return kind_; }
  double c() const { return c_; }
  double p() const { return p_; }
  double s_lower() const { return s_lower_; }
  double s_upper() const { return s_upper_; }
  double d() const { return d_; }
  std::size_t d_par() const { return d_par_; }

  /// Lower and upper admissible bounds at n (kind == admissible only).
  double lower_bound(std::size_t n) const;
  double upper_bound(std::size_t n) const;

  /// tau_n for n >= 1. Throws ConfigError when an admissible schedule leaves its band.
  double step(std::size_t n) const;

 private:
  StepSchedule() = default;

  Kind kind_ = Kind::constant;
  double c_ = 1.0;
  double p_ = 0.0;
  double s_lower_ = 0.0;
  double s_upper_ = 0.0;
  double d_ = 0.0;
  std::size_t d_par_ = 1;
};

}  // namespace csg
