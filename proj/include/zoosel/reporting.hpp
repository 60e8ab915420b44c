#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zoosel/canonical_json.hpp"
#include "zoosel/core.hpp"

namespace zoosel {

enum class Method { bandit, brute_force, benchmark };

std::string_view to_string(Method m);

// One leaderboard row.
struct RankedArm {
  ArmIndex arm = 0;
  std::string id;
  double estimated_value = 0.0;
  double accuracy = 0.0;  // p-hat, exact target accuracy, or benchmark accuracy by method
  std::int64_t pulls = 0;
  std::int64_t successes = 0;
  double size_mb = 0.0;
  double complexity_mmac = 0.0;

  friend bool operator==(const RankedArm&, const RankedArm&) = default;
};

struct Savings {
  double eval = 0.0;
  double compute_mmac = 0.0;
};

struct SelectionReport {
  Method method = Method::bandit;
  ExperimentConfig config;  // only weights are meaningful for the baselines
  std::size_t dataset_size = 0;
  std::vector<RankedArm> ranking;  // best first
  std::int64_t pulls_total = 0;
  double cost_mmac = 0.0;
  Savings savings;

  ArmIndex top() const { return ranking.front().arm; }
  // Pulls indexed by arm (pool order).
  std::vector<std::int64_t> pulls_per_arm() const;
};

// eval = 1 - sum(n_i) / (K*N);
// compute = 1 - sum(n_i * c_i) / (N * sum(c_i)).
Savings compute_savings(std::span<const std::int64_t> pulls_per_arm, const ModelPool& pool,
                        std::size_t dataset_size);

// Sorts rows by estimated value, best first; equal values keep arm order.
void sort_ranking(std::vector<RankedArm>& rows);

struct ArmSummary {
  ArmIndex arm = 0;
  std::string id;
  double selection_frequency = 0.0;
  double mean_pulls = 0.0;
};

struct AggregateReport {
  Method method = Method::bandit;
  ExperimentConfig config;
  std::int64_t repetitions = 0;
  std::size_t dataset_size = 0;
  std::vector<ArmSummary> arms;  // pool order
  // Averages over each run's top-ranked arm.
  double mean_top_accuracy = 0.0;
  double mean_top_size_mb = 0.0;
  double mean_top_complexity_mmac = 0.0;
  double mean_top_value = 0.0;
  bool exact_accuracy = false;  // target accuracy from a full trace, not p-hat
  double mean_pulls_total = 0.0;
  Savings mean_savings;
  SelectionReport representative;  // the first repetition, for the leaderboard view
};

// Reports must share one pool. When exact_accuracies is given it is indexed by
// arm and used for the target-accuracy and value columns; otherwise each
// run's own estimate of its top arm is used.
AggregateReport aggregate(std::span<const SelectionReport> reports, const ModelPool& pool,
                          const std::optional<std::vector<double>>& exact_accuracies);

Json to_json(const SelectionReport& report);
Json to_json(const AggregateReport& report);
Json to_json(const ExperimentConfig& config);

SelectionReport selection_report_from_json(const Json& doc);
AggregateReport aggregate_report_from_json(const Json& doc);
ExperimentConfig config_from_json(const Json& doc);

std::string serialize_report(const SelectionReport& report);
std::string serialize_report(const AggregateReport& report);
SelectionReport deserialize_selection_report(std::string_view text);
AggregateReport deserialize_aggregate_report(std::string_view text);

}  // namespace zoosel
