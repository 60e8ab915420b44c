#include "zoosel/baselines.hpp"

namespace zoosel {

SelectionReport benchmark_select(const ModelPool& pool, const StaticScores& scores,
                                 const MetricWeights& w) {
  validate_weights(w);
  SelectionReport report;
  report.method = Method::benchmark;
  report.config.weights = w;
  for (ArmIndex i = 0; i < pool.size(); ++i) {
    const auto& m = pool[i];
    report.ranking.push_back({i, m.id, composite_value(m.benchmark_accuracy, i, scores, w),
                              m.benchmark_accuracy, 0, 0, m.size_mb, m.complexity_mmac});
  }
  sort_ranking(report.ranking);
  report.savings = {1.0, 1.0};
  return report;
}

SelectionReport brute_force(const ModelPool& pool, EvalBackend& backend, const Dataset& dataset,
                            const StaticScores& scores, const MetricWeights& w) {
  validate_weights(w);
  SelectionReport report;
  report.method = Method::brute_force;
  report.config.weights = w;
  report.dataset_size = dataset.size();
  const auto n = static_cast<std::int64_t>(dataset.size());
  for (ArmIndex i = 0; i < pool.size(); ++i) {
    std::int64_t hits = 0;
    for (const auto& r : backend.evaluate_batch(i, dataset.ids())) {
      hits += r.correct ? 1 : 0;
      report.cost_mmac += r.cost_mmac;
    }
    // Same expression as a saturated bandit arm's estimate, so the two agree bit for bit.
    const double acc = static_cast<double>(hits) / static_cast<double>(n);
    const auto& m = pool[i];
    report.ranking.push_back(
        {i, m.id, composite_value(acc, i, scores, w), acc, n, hits, m.size_mb, m.complexity_mmac});
    report.pulls_total += n;
  }
  sort_ranking(report.ranking);
  report.savings = compute_savings(report.pulls_per_arm(), pool, dataset.size());
  return report;
}

}  // namespace zoosel
