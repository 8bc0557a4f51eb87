#include "csg/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csg/errors.hpp"

namespace csg {

namespace {

double band_exponent(std::size_t d_par, double d) {
  const double m = static_cast<double>(std::max<std::size_t>(d_par, 2));
  return 1.0 - 1.0 / m + d;
}

}  // namespace

StepSchedule StepSchedule::constant(double c) {
  if (!(std::isfinite(c) && c > 0.0)) throw ConfigError("StepSchedule: constant step must be finite and > 0");
  StepSchedule s;
  s.kind_ = Kind::constant;
  s.c_ = c;
  return s;
}

StepSchedule StepSchedule::power(double c, double p) {
  if (!(std::isfinite(c) && c > 0.0)) throw ConfigError("StepSchedule: scale c must be finite and > 0");
  if (!std::isfinite(p)) throw ConfigError("StepSchedule: exponent p must be finite");
  StepSchedule s;
  s.kind_ = Kind::power;
  s.c_ = c;
  s.p_ = p;
  return s;
}

StepSchedule StepSchedule::admissible(double s_lower, double s_upper, double d, std::size_t d_par) {
  return admissible(s_upper, band_exponent(d_par, d), s_lower, s_upper, d, d_par);
}

StepSchedule StepSchedule::admissible(double c, double p, double s_lower, double s_upper, double d,
                                      std::size_t d_par) {
  if (d_par < 1) throw ConfigError("StepSchedule: d_par must be >= 1");
  const double m = static_cast<double>(std::max<std::size_t>(d_par, 2));
  if (!(d > 0.0 && d < 1.0 / m)) {
    throw ConfigError("StepSchedule: D = " + std::to_string(d) + " outside (0, 1/max(d_par,2))");
  }
  if (!(s_lower > 0.0 && s_upper > 0.0 && std::isfinite(s_lower) && std::isfinite(s_upper))) {
    throw ConfigError("StepSchedule: S_lower and S_upper must be finite and > 0");
  }
  if (!(std::isfinite(c) && c > 0.0 && std::isfinite(p))) throw ConfigError("StepSchedule: invalid c or p");
  StepSchedule s;
  s.kind_ = Kind::admissible;
  s.c_ = c;
  s.p_ = p;
  s.s_lower_ = s_lower;
  s.s_upper_ = s_upper;
  s.d_ = d;
  s.d_par_ = d_par;
  // The band is nonempty for all n only if the emitted law fits at n = 1 and
  // decays no faster than 1/n and no slower than the upper envelope.
  if (p > 1.0 || p < band_exponent(d_par, d) || c < s_lower || c > s_upper) {
    throw ConfigError("StepSchedule: power law c*n^-p leaves the admissible band");
  }
  return s;
}

double StepSchedule::lower_bound(std::size_t n) const { return s_lower_ / static_cast<double>(n); }

double StepSchedule::upper_bound(std::size_t n) const {
  return s_upper_ * std::pow(static_cast<double>(n), -band_exponent(d_par_, d_));
}

double StepSchedule::step(std::size_t n) const {
  if (n < 1) throw InvalidInput("StepSchedule: n must be >= 1");
  switch (kind_) {
    case Kind::constant:
      return c_;
    case Kind::power:
      return c_ * std::pow(static_cast<double>(n), -p_);
    case Kind::admissible: {
      const double tau = c_ * std::pow(static_cast<double>(n), -p_);
      const double slack = 1e-12 * tau;
      if (tau + slack < lower_bound(n) || tau - slack > upper_bound(n)) {
        throw ConfigError("StepSchedule: step " + std::to_string(tau) + " at n = " + std::to_string(n) +
                          " violates the admissible band");
      }
      return tau;
    }
  }
  return c_;
}

}  // namespace csg
