#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "zoosel/error.hpp"

namespace zoosel {

using ArmIndex = std::size_t;

// One arm: a pretrained model with the static metrics known before any
// target-data evaluation.
struct ModelCandidate {
  std::string id;
  double benchmark_accuracy = 0.0;  // source-benchmark accuracy, [0,1]
  double size_mb = 0.0;
  double complexity_mmac = 0.0;  // million multiply-accumulates
  std::string source;

  friend bool operator==(const ModelCandidate&, const ModelCandidate&) = default;
};

// Ordered, validated set of candidates. Position in the list is the arm index
// and the tie-break order everywhere.
class ModelPool {
 public:
  explicit ModelPool(std::vector<ModelCandidate> candidates);

  std::size_t size() const noexcept { return candidates_.size(); }
  const ModelCandidate& operator[](ArmIndex i) const { return candidates_[i]; }
  const std::vector<ModelCandidate>& candidates() const noexcept { return candidates_; }
  auto begin() const noexcept { return candidates_.begin(); }
  auto end() const noexcept { return candidates_.end(); }

  friend bool operator==(const ModelPool&, const ModelPool&) = default;

 private:
  std::vector<ModelCandidate> candidates_;
};

struct MetricWeights {
  double accuracy = 0.0;
  double size = 0.0;
  double complexity = 0.0;

  double total() const noexcept { return accuracy + size + complexity; }

  friend bool operator==(const MetricWeights&, const MetricWeights&) = default;
};

// Throws ValidationError("weights") when a component leaves [0,1] or all are zero.
void validate_weights(const MetricWeights& w);

// Parses "accuracy,size,complexity".
MetricWeights parse_weights_triple(std::string_view text);

// Inverted min-max scores: the smallest model scores 1, the largest 0.
struct StaticScore {
  double size = 1.0;
  double complexity = 1.0;
};

class StaticScores {
 public:
  StaticScores() = default;
  explicit StaticScores(std::vector<StaticScore> per_arm) : per_arm_(std::move(per_arm)) {}

  std::size_t size() const noexcept { return per_arm_.size(); }
  const StaticScore& operator[](ArmIndex i) const { return per_arm_[i]; }

 private:
  std::vector<StaticScore> per_arm_;
};

StaticScores normalize_static(const ModelPool& pool);

// w.size * size_score + w.complexity * complexity_score for one arm.
inline double static_term(const StaticScores& scores, ArmIndex arm, const MetricWeights& w) {
  return w.size * scores[arm].size + w.complexity * scores[arm].complexity;
}

// The composite value of an arm given an accuracy figure (a correctness bit,
// a posterior sample, an empirical or exact accuracy).
inline double composite_value(double accuracy, ArmIndex arm, const StaticScores& scores,
                              const MetricWeights& w) {
  return w.accuracy * accuracy + static_term(scores, arm, w);
}

enum class Strategy { epsilon_greedy, ucb, thompson };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct ExperimentConfig {
  Strategy strategy = Strategy::thompson;
  std::int64_t budget = 0;  // pulls across all arms; signed so -1 can be rejected
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  MetricWeights weights;
  std::int64_t repetitions = 1;
};

// Throws ValidationError naming the offending field.
void validate(const ExperimentConfig& config);

// Pool files: a JSON array of records or CSV with header
// id,benchmark_accuracy,size_mb,complexity_mmac,source.
ModelPool load_pool(std::string_view text);
std::string save_pool(const ModelPool& pool);

}  // namespace zoosel
