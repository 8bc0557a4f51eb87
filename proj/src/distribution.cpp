#include "csg/distribution.hpp"

#include <algorithm>
#include <cmath>

namespace csg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

double uniform_in(Rng& rng, double lo, double hi) {
  const double v = lo + (hi - lo) * uniform01(rng);
  return std::min(v, hi);
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return std::min(i, n - 1);
}

Sample Distribution::sample(Rng& rng) const {
  if (!sampler) throw InvalidState("Distribution: no sampler configured");
  Sample s = sampler(rng);
  if (!support.contains(s.view())) throw NumericError("Distribution: sampler produced a point outside the support");
  return s;
}

double Distribution::cdf(double x) const {
  if (!has_cdf()) throw UnsupportedConfiguration("Distribution: no one-dimensional CDF available");
  if (x <= support.lower()[0]) return 0.0;
  if (x >= support.upper()[0]) return 1.0;
  return std::clamp(cdf_1d(x), 0.0, 1.0);
}

Distribution uniform_box(const BoxDomain& support) {
  Distribution d;
  d.kind = Distribution::Kind::uniform_box;
  d.support = support;
  d.sampler = [support](Rng& rng) {
    std::vector<double> v(support.dimension());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = uniform_in(rng, support.lower()[i], support.upper()[i]);
    return Sample(std::move(v));
  };
  if (support.dimension() == 1) {
    if (!(support.lower()[0] < support.upper()[0])) throw InvalidInput("uniform_box: degenerate interval");
    const double lo = support.lower()[0];
    const double hi = support.upper()[0];
    d.cdf_1d = [lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); };
    d.pdf_1d = [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 / (hi - lo) : 0.0; };
  }
  return d;
}

}  // namespace csg
