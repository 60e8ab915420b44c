#pragma once

#include "zoosel/core.hpp"
#include "zoosel/eval_backend.hpp"
#include "zoosel/reporting.hpp"

namespace zoosel {

// Ranks by the composite value with each model's recorded benchmark accuracy
// standing in for target accuracy. Touches no target data.
SelectionReport benchmark_select(const ModelPool& pool, const StaticScores& scores,
                                 const MetricWeights& w);

// Evaluates every (arm, sample) pair and ranks by the composite value with
// exact target accuracy.
SelectionReport brute_force(const ModelPool& pool, EvalBackend& backend, const Dataset& dataset,
                            const StaticScores& scores, const MetricWeights& w);

}  // namespace zoosel
