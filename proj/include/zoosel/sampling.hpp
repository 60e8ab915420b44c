#pragma once

#include <boost/random/mersenne_twister.hpp>

namespace zoosel {

using Rng = boost::random::mt19937_64;

// Gamma(shape, 1) by Marsaglia-Tsang squeeze/rejection; shape < 1 is boosted
// by one and scaled back with U^(1/shape).
double sample_gamma(double shape, Rng& rng);

// Beta(alpha, beta) as X / (X + Y) with X ~ Gamma(alpha), Y ~ Gamma(beta).
double sample_beta(double alpha, double beta, Rng& rng);

}  // namespace zoosel
