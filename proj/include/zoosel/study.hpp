#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "zoosel/bandit.hpp"
#include "zoosel/reporting.hpp"

namespace zoosel {

// Progress hook for a whole study: repetition index plus its live state.
// May be called from several worker threads at once.
using StudyObserver = std::function<void(std::size_t repetition, const BanditState&)>;

struct StudyOptions {
  std::size_t threads = 0;  // 0 = hardware concurrency
  StudyObserver observer;
};

// Runs config.repetitions independent experiments, repetition r seeded with
// config.seed + r, and aggregates them. The result does not depend on the
// thread count.
AggregateReport run_study(const ExperimentConfig& config, const ModelPool& pool,
                          EvalBackend& backend, const Dataset& dataset,
                          const std::optional<std::vector<double>>& exact_accuracies,
                          const StudyOptions& options = {});

// Exact per-arm accuracy from a trace complete over pool x dataset, or
// std::nullopt when it is not complete.
std::optional<std::vector<double>> exact_accuracies(const ModelPool& pool, const TraceTable& table,
                                                    const Dataset& dataset);

// Total pulls a study will make: min(budget, K*N) * repetitions.
std::int64_t study_pull_count(const ExperimentConfig& config, std::size_t arms,
                              std::size_t samples);

}  // namespace zoosel
