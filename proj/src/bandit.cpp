#include "zoosel/bandit.hpp"

#include <cmath>
#include <numeric>

#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace zoosel {

ArmState::ArmState(std::vector<std::uint32_t> permutation, BetaPrior prior)
    : permutation_(std::move(permutation)), prior_(prior) {}

double ArmState::mean_accuracy() const noexcept {
  if (pulls_ > 0) return static_cast<double>(successes_) / static_cast<double>(pulls_);
  return prior_.alpha / (prior_.alpha + prior_.beta);
}

void ArmState::record(bool correct) {
  ++cursor_;
  ++pulls_;
  if (correct) ++successes_;
}

ArmState ArmState::with_counts(std::int64_t pulls, std::int64_t successes, std::size_t remaining,
                               BetaPrior prior) {
  ArmState s(std::vector<std::uint32_t>(remaining, 0), prior);
  s.pulls_ = pulls;
  s.successes_ = successes;
  return s;
}

double composite_reward(bool correct, ArmIndex arm, const StaticScores& scores,
                        const MetricWeights& w) {
  return composite_value(correct ? 1.0 : 0.0, arm, scores, w);
}

double estimated_value(const ArmState& state, ArmIndex arm, const StaticScores& scores,
                       const MetricWeights& w) {
  return composite_value(state.mean_accuracy(), arm, scores, w);
}

namespace {

// Argmax of index(i) over non-saturated arms; strict '>' keeps the lowest index on ties.
template <typename Index>
std::optional<ArmIndex> argmax_open(const BanditState& state, Index&& index) {
  std::optional<ArmIndex> best;
  double best_value = 0.0;
  for (ArmIndex i = 0; i < state.arms.size(); ++i) {
    if (state.arms[i].saturated()) continue;
    const double v = index(i);
    if (!best || v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

std::vector<std::uint32_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  // Fisher-Yates with boost's portable integer distribution.
  for (std::size_t i = n; i > 1; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

}  // namespace

std::optional<ArmIndex> select_epsilon_greedy(const BanditState& state, const StaticScores& scores,
                                              const MetricWeights& w, double epsilon, Rng& rng) {
  std::vector<ArmIndex> open;
  for (ArmIndex i = 0; i < state.arms.size(); ++i)
    if (!state.arms[i].saturated()) open.push_back(i);
  if (open.empty()) return std::nullopt;

  if (boost::random::uniform_01<double>{}(rng) < epsilon) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    return open[pick(rng)];
  }
  return argmax_open(state, [&](ArmIndex i) { return estimated_value(state.arms[i], i, scores, w); });
}

double ucb_index(const BanditState& state, ArmIndex arm, const StaticScores& scores,
                 const MetricWeights& w) {
  const auto& a = state.arms[arm];
  const double log_t = std::log(static_cast<double>(std::max<std::int64_t>(state.total_pulls, 1)));
  const double bonus = std::sqrt(2.0 * log_t / static_cast<double>(a.pulls()));
  // Static scores are known exactly, so only the accuracy term gets a bonus.
  return estimated_value(a, arm, scores, w) + w.accuracy * bonus;
}

std::optional<ArmIndex> select_ucb(const BanditState& state, const StaticScores& scores,
                                   const MetricWeights& w, Rng&) {
  for (ArmIndex i = 0; i < state.arms.size(); ++i)
    if (!state.arms[i].saturated() && state.arms[i].pulls() == 0) return i;
  return argmax_open(state, [&](ArmIndex i) { return ucb_index(state, i, scores, w); });
}

std::optional<ArmIndex> select_thompson(const BanditState& state, const StaticScores& scores,
                                        const MetricWeights& w, Rng& rng) {
  return argmax_open(state, [&](ArmIndex i) {
    const auto& a = state.arms[i];
    const double theta = sample_beta(a.alpha(), a.beta(), rng);
    return composite_value(theta, i, scores, w);
  });
}

std::optional<ArmIndex> select_arm(Strategy strategy, const BanditState& state,
                                   const StaticScores& scores, const MetricWeights& w,
                                   double epsilon, Rng& rng) {
  switch (strategy) {
    case Strategy::epsilon_greedy:
      return select_epsilon_greedy(state, scores, w, epsilon, rng);
    case Strategy::ucb:
      return select_ucb(state, scores, w, rng);
    case Strategy::thompson:
      return select_thompson(state, scores, w, rng);
  }
  return std::nullopt;
}

std::vector<RankedArm> rank_arms(const BanditState& state, const ModelPool& pool,
                                 const StaticScores& scores, const MetricWeights& w) {
  std::vector<RankedArm> rows;
  rows.reserve(pool.size());
  for (ArmIndex i = 0; i < pool.size(); ++i) {
    const auto& a = state.arms[i];
    rows.push_back({i, pool[i].id, estimated_value(a, i, scores, w), a.mean_accuracy(), a.pulls(),
                    a.successes(), pool[i].size_mb, pool[i].complexity_mmac});
  }
  sort_ranking(rows);
  return rows;
}

SelectionReport run_experiment(const ExperimentConfig& config, const ModelPool& pool,
                               EvalBackend& backend, const Dataset& dataset,
                               const PullObserver& observer) {
  validate(config);
  const auto scores = normalize_static(pool);
  Rng rng(config.seed);

  BanditState state;
  state.arms.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    state.arms.emplace_back(shuffled_indices(dataset.size(), rng));

  double cost = 0.0;
  while (state.total_pulls < config.budget) {
    auto arm = select_arm(config.strategy, state, scores, config.weights, config.epsilon, rng);
    if (!arm) break;  // every arm saturated
    auto& a = state.arms[*arm];
    const auto& sample = dataset[a.next_sample()];
    PullResult pull;
    try {
      pull = backend.evaluate(*arm, sample);
    } catch (const BackendError& e) {
      throw BackendError(std::string(e.what()) + " [experiment aborted after " +
                         std::to_string(state.total_pulls) + " of " + std::to_string(config.budget) +
                         " pulls, at arm '" + pool[*arm].id + "']");
    }
    a.record(pull.correct);
    ++state.total_pulls;
    cost += pull.cost_mmac;
    if (observer) observer(state);
  }

  SelectionReport report;
  report.method = Method::bandit;
  report.config = config;
  report.dataset_size = dataset.size();
  report.ranking = rank_arms(state, pool, scores, config.weights);
  report.pulls_total = state.total_pulls;
  report.cost_mmac = cost;
  report.savings = compute_savings(report.pulls_per_arm(), pool, dataset.size());
  return report;
}

}  // namespace zoosel
