#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "zoosel/core.hpp"
#include "zoosel/eval_backend.hpp"
#include "zoosel/reporting.hpp"
#include "zoosel/sampling.hpp"

namespace zoosel {

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

// Per-arm posterior bookkeeping. Samples are consumed without replacement in
// the order of a seeded permutation of the dataset.
class ArmState {
 public:
  ArmState(std::vector<std::uint32_t> permutation, BetaPrior prior = {});

  std::int64_t pulls() const noexcept { return pulls_; }
  std::int64_t successes() const noexcept { return successes_; }
  double alpha() const noexcept { return prior_.alpha + static_cast<double>(successes_); }
  double beta() const noexcept { return prior_.beta + static_cast<double>(pulls_ - successes_); }
  const BetaPrior& prior() const noexcept { return prior_; }

  bool saturated() const noexcept { return cursor_ == permutation_.size(); }
  std::size_t remaining() const noexcept { return permutation_.size() - cursor_; }

  // Empirical accuracy, or the prior mean before the first pull.
  double mean_accuracy() const noexcept;

  // Dataset index of the next unconsumed sample. Requires !saturated().
  std::uint32_t next_sample() const { return permutation_[cursor_]; }
  void record(bool correct);

  // Test hook: set counts without a permutation behind them.
  static ArmState with_counts(std::int64_t pulls, std::int64_t successes, std::size_t remaining = 1,
                              BetaPrior prior = {});

 private:
  std::vector<std::uint32_t> permutation_;
  std::size_t cursor_ = 0;
  std::int64_t pulls_ = 0;
  std::int64_t successes_ = 0;
  BetaPrior prior_;
};

struct BanditState {
  std::vector<ArmState> arms;
  std::int64_t total_pulls = 0;
};

// w.accuracy * correct + static terms.
double composite_reward(bool correct, ArmIndex arm, const StaticScores& scores,
                        const MetricWeights& w);

// Composite value with the arm's empirical (or prior-mean) accuracy.
double estimated_value(const ArmState& state, ArmIndex arm, const StaticScores& scores,
                       const MetricWeights& w);

// estimated_value + w.accuracy * sqrt(2 ln t / n_i); requires n_i > 0.
double ucb_index(const BanditState& state, ArmIndex arm, const StaticScores& scores,
                 const MetricWeights& w);

// Each selector returns std::nullopt when every arm is saturated. Ties go to
// the lowest arm index.
std::optional<ArmIndex> select_epsilon_greedy(const BanditState& state, const StaticScores& scores,
                                              const MetricWeights& w, double epsilon, Rng& rng);
std::optional<ArmIndex> select_ucb(const BanditState& state, const StaticScores& scores,
                                   const MetricWeights& w, Rng& rng);
std::optional<ArmIndex> select_thompson(const BanditState& state, const StaticScores& scores,
                                        const MetricWeights& w, Rng& rng);

std::optional<ArmIndex> select_arm(Strategy strategy, const BanditState& state,
                                   const StaticScores& scores, const MetricWeights& w,
                                   double epsilon, Rng& rng);

// Current leaderboard of a running or finished experiment.
std::vector<RankedArm> rank_arms(const BanditState& state, const ModelPool& pool,
                                 const StaticScores& scores, const MetricWeights& w);

// Called after every pull with the live state.
using PullObserver = std::function<void(const BanditState&)>;

// One budgeted experiment, seeded by config.seed. config.repetitions is
// echoed but not acted on here.
SelectionReport run_experiment(const ExperimentConfig& config, const ModelPool& pool,
                               EvalBackend& backend, const Dataset& dataset,
                               const PullObserver& observer = {});

}  // namespace zoosel
