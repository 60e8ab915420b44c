#include "zoosel/sampling.hpp"

#include <cmath>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace zoosel {

double sample_gamma(double shape, Rng& rng) {
  boost::random::uniform_01<double> unit;
  if (shape < 1.0) return sample_gamma(shape + 1.0, rng) * std::pow(unit(rng), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  boost::random::normal_distribution<double> normal;
  for (;;) {
    const double x = normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = unit(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_beta(double alpha, double beta, Rng& rng) {
  const double x = sample_gamma(alpha, rng);
  const double y = sample_gamma(beta, rng);
  return x / (x + y);
}

}  // namespace zoosel
