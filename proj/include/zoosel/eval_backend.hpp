#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zoosel/core.hpp"

namespace httplib {
class Client;
}

namespace zoosel {

// The target samples, in a fixed order. Arm permutations index into this.
class Dataset {
 public:
  explicit Dataset(std::vector<std::string> sample_ids);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& operator[](std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  bool contains(std::string_view id) const;

  friend bool operator==(const Dataset& a, const Dataset& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Dataset files list one sample id per line.
Dataset load_dataset(std::string_view text);

struct PullResult {
  ArmIndex arm = 0;
  std::string sample_id;
  bool correct = false;
  double cost_mmac = 0.0;
};

// Cached per-(model, sample) correctness bits.
class TraceTable {
 public:
  // Returns false when the cell already holds the same bit; throws on conflict.
  bool insert(const std::string& model_id, const std::string& sample_id, bool correct);

  // Throws BackendError naming the pair when absent.
  bool at(std::string_view model_id, std::string_view sample_id) const;
  bool contains(std::string_view model_id, std::string_view sample_id) const;

  std::size_t entries() const noexcept { return entries_; }
  const std::vector<std::string>& model_ids() const noexcept { return models_; }
  const std::vector<std::string>& sample_ids() const noexcept { return samples_; }

  // True when every pool model has a bit for every dataset sample.
  bool complete_over(const ModelPool& pool, const Dataset& dataset) const;

  // Fraction of correct samples for one model over the dataset; all cells must exist.
  double accuracy(std::string_view model_id, const Dataset& dataset) const;

 private:
  std::int8_t cell(std::string_view model_id, std::string_view sample_id) const;

  std::vector<std::string> models_;
  std::vector<std::string> samples_;
  std::unordered_map<std::string, std::size_t> model_index_;
  std::unordered_map<std::string, std::size_t> sample_index_;
  std::vector<std::vector<std::int8_t>> bits_;  // [model][sample], -1 = absent
  std::size_t entries_ = 0;
};

struct LoadedTrace {
  TraceTable table;
  Dataset dataset;
};

// CSV with header model_id,sample_id,correct. The dataset lists sample ids in
// first-appearance order.
LoadedTrace load_trace(std::string_view text);

// Canonical trace CSV: rows sorted by model_id, then sample_id.
std::string save_trace(const TraceTable& table);

class EvalBackend {
 public:
  virtual ~EvalBackend() = default;

  // Must be safe to call concurrently.
  virtual PullResult evaluate(ArmIndex arm, const std::string& sample_id) = 0;

  // Default loops over evaluate(); remote overrides with one batched request.
  virtual std::vector<PullResult> evaluate_batch(ArmIndex arm,
                                                 std::span<const std::string> sample_ids);
};

class TraceBackend final : public EvalBackend {
 public:
  // Every pool id must appear in the table (cells may still be missing).
  TraceBackend(const ModelPool& pool, const TraceTable& table);

  PullResult evaluate(ArmIndex arm, const std::string& sample_id) override;

 private:
  const ModelPool& pool_;
  const TraceTable& table_;
};

// Per-(seed, arm, sample) hash mapped to [0,1). Order independent.
double synthetic_uniform(std::uint64_t seed, ArmIndex arm, std::string_view sample_id);

struct SyntheticSpec {
  std::vector<double> accuracies;  // true p_i per arm
  std::size_t samples = 0;         // N
  std::uint64_t seed = 0;
};

class SyntheticBackend final : public EvalBackend {
 public:
  SyntheticBackend(const ModelPool& pool, std::vector<double> accuracies, std::uint64_t seed);

  PullResult evaluate(ArmIndex arm, const std::string& sample_id) override;

 private:
  const ModelPool& pool_;
  std::vector<double> accuracies_;
  std::uint64_t seed_;
};

// Complete table of the synthetic backend's bits over pool x dataset.
TraceTable synthetic_table(const ModelPool& pool, std::span<const double> accuracies,
                           const Dataset& dataset, std::uint64_t seed);

// Dataset of synthetic sample ids s0..s{N-1}, zero padded.
Dataset synthetic_dataset(std::size_t samples);

struct SyntheticFixture {
  ModelPool pool;
  TraceTable table;
  Dataset dataset;
  std::vector<double> accuracies;
};

std::string synthetic_sample_id(std::size_t index, std::size_t count);
std::string synthetic_model_id(std::size_t index, std::size_t count);

// Bounds of the generated pool's static metrics.
inline constexpr double kMinSizeMb = 22.0;
inline constexpr double kMaxSizeMb = 2581.0;
inline constexpr double kMinComplexityMmac = 229.0;
inline constexpr double kMaxComplexityMmac = 127750.0;

// Draws true accuracies for `arms` models when spec.accuracies is empty;
// otherwise spec.accuracies.size() must equal `arms`.
SyntheticFixture generate_synthetic(const SyntheticSpec& spec, std::size_t arms);

// Client for the remote evaluator protocol: GET /models, POST /evaluate.
class RemoteBackend final : public EvalBackend {
 public:
  RemoteBackend(std::string base_url, const ModelPool& pool);
  ~RemoteBackend() override;

  PullResult evaluate(ArmIndex arm, const std::string& sample_id) override;
  std::vector<PullResult> evaluate_batch(ArmIndex arm,
                                         std::span<const std::string> sample_ids) override;

  std::size_t requests() const noexcept { return requests_.load(); }

 private:
  std::string base_url_;
  const ModelPool& pool_;
  std::unique_ptr<httplib::Client> client_;
  std::mutex mutex_;
  std::atomic<std::size_t> requests_{0};
};

ModelPool fetch_remote_pool(const std::string& base_url);

// Wraps another backend and counts evaluate calls.
class CountingBackend final : public EvalBackend {
 public:
  explicit CountingBackend(EvalBackend& inner) : inner_(inner) {}

  PullResult evaluate(ArmIndex arm, const std::string& sample_id) override {
    ++calls_;
    return inner_.evaluate(arm, sample_id);
  }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  EvalBackend& inner_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace zoosel
