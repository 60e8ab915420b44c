#include "zoosel/study.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace zoosel {

AggregateReport run_study(const ExperimentConfig& config, const ModelPool& pool,
                          EvalBackend& backend, const Dataset& dataset,
                          const std::optional<std::vector<double>>& exact,
                          const StudyOptions& options) {
  validate(config);
  const auto reps = static_cast<std::size_t>(config.repetitions);
  std::vector<SelectionReport> reports(reps);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r; (r = next++) < reps;) {
      try {
        ExperimentConfig rep = config;
        rep.seed = config.seed + r;
        PullObserver observer;
        if (options.observer)
          observer = [&, r](const BanditState& s) { options.observer(r, s); };
        reports[r] = run_experiment(rep, pool, backend, dataset, observer);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = reps;
      }
    }
  };

  std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, reps);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool_threads;
    for (std::size_t i = 0; i < threads; ++i) pool_threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(reports, pool, exact);
}

std::optional<std::vector<double>> exact_accuracies(const ModelPool& pool, const TraceTable& table,
                                                    const Dataset& dataset) {
  if (!table.complete_over(pool, dataset)) return std::nullopt;
  std::vector<double> out;
  out.reserve(pool.size());
  for (const auto& m : pool) out.push_back(table.accuracy(m.id, dataset));
  return out;
}

std::int64_t study_pull_count(const ExperimentConfig& config, std::size_t arms,
                              std::size_t samples) {
  const auto full = static_cast<std::int64_t>(arms * samples);
  return std::min(config.budget, full) * config.repetitions;
}

}  // namespace zoosel
