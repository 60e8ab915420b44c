#include "zoosel/eval_backend.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <httplib.h>

#include "zoosel/canonical_json.hpp"
#include "zoosel/csv.hpp"

namespace zoosel {
namespace {

std::string pair_label(std::string_view model_id, std::string_view sample_id) {
  return "(" + std::string(model_id) + ", " + std::string(sample_id) + ")";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Integer / scale is correctly rounded, so the result equals the parsed
// decimal text and survives a save/load cycle unchanged.
double round_decimal(double v, double scale) { return std::round(v * scale) / scale; }

}  // namespace

Dataset::Dataset(std::vector<std::string> sample_ids) : ids_(std::move(sample_ids)) {
  if (ids_.empty()) throw ValidationError("dataset", "dataset is empty");
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) throw ValidationError("dataset", "dataset: empty sample id");
    if (!index_.emplace(ids_[i], i).second)
      throw ValidationError("dataset", "dataset: duplicate sample id '" + ids_[i] + "'");
  }
}

bool Dataset::contains(std::string_view id) const { return index_.contains(std::string(id)); }

Dataset load_dataset(std::string_view text) {
  std::vector<std::string> ids;
  for (auto line : csv::lines(text)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (!line.empty()) ids.emplace_back(line);
  }
  return Dataset(std::move(ids));
}

bool TraceTable::insert(const std::string& model_id, const std::string& sample_id, bool correct) {
  auto [mit, new_model] = model_index_.try_emplace(model_id, models_.size());
  if (new_model) {
    models_.push_back(model_id);
    bits_.emplace_back(samples_.size(), std::int8_t{-1});
  }
  auto [sit, new_sample] = sample_index_.try_emplace(sample_id, samples_.size());
  if (new_sample) {
    samples_.push_back(sample_id);
    for (auto& row : bits_) row.push_back(-1);
  }
  auto& cell = bits_[mit->second][sit->second];
  const auto bit = static_cast<std::int8_t>(correct ? 1 : 0);
  if (cell == -1) {
    cell = bit;
    ++entries_;
    return true;
  }
  if (cell != bit) throw ValidationError("trace", "trace: conflicting bits for " +
                                                      pair_label(model_id, sample_id));
  return false;
}

std::int8_t TraceTable::cell(std::string_view model_id, std::string_view sample_id) const {
  auto m = model_index_.find(std::string(model_id));
  if (m == model_index_.end()) return -1;
  auto s = sample_index_.find(std::string(sample_id));
  if (s == sample_index_.end()) return -1;
  return bits_[m->second][s->second];
}

bool TraceTable::contains(std::string_view model_id, std::string_view sample_id) const {
  return cell(model_id, sample_id) != -1;
}

bool TraceTable::at(std::string_view model_id, std::string_view sample_id) const {
  auto c = cell(model_id, sample_id);
  if (c == -1) throw BackendError("trace miss for " + pair_label(model_id, sample_id));
  return c == 1;
}

bool TraceTable::complete_over(const ModelPool& pool, const Dataset& dataset) const {
  for (const auto& m : pool)
    for (const auto& s : dataset.ids())
      if (!contains(m.id, s)) return false;
  return true;
}

double TraceTable::accuracy(std::string_view model_id, const Dataset& dataset) const {
  std::size_t hits = 0;
  for (const auto& s : dataset.ids()) hits += at(model_id, s) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

LoadedTrace load_trace(std::string_view text) {
  auto rows = csv::lines(text);
  if (rows.empty() || rows[0] != "model_id,sample_id,correct")
    throw ParseError("trace file: expected header 'model_id,sample_id,correct'");
  TraceTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    auto f = csv::split_record(rows[r]);
    const auto label = "trace row " + std::to_string(r);
    if (f.size() != 3) throw ParseError(label + ": expected 3 fields");
    if (f[0].empty() || f[1].empty()) throw ParseError(label + ": empty model or sample id");
    if (f[2] != "0" && f[2] != "1") throw ParseError(label + ": correct must be 0 or 1");
    table.insert(f[0], f[1], f[2] == "1");
  }
  if (table.entries() == 0) throw ParseError("trace file: no rows");
  Dataset dataset(table.sample_ids());
  return {std::move(table), std::move(dataset)};
}

std::string save_trace(const TraceTable& table) {
  auto models = table.model_ids();
  auto samples = table.sample_ids();
  std::sort(models.begin(), models.end());
  std::sort(samples.begin(), samples.end());
  std::string out = "model_id,sample_id,correct\n";
  for (const auto& m : models)
    for (const auto& s : samples)
      if (table.contains(m, s)) {
        out += csv::escape_field(m);
        out += ',';
        out += csv::escape_field(s);
        out += table.at(m, s) ? ",1\n" : ",0\n";
      }
  return out;
}

std::vector<PullResult> EvalBackend::evaluate_batch(ArmIndex arm,
                                                    std::span<const std::string> sample_ids) {
  std::vector<PullResult> out;
  out.reserve(sample_ids.size());
  for (const auto& s : sample_ids) out.push_back(evaluate(arm, s));
  return out;
}

TraceBackend::TraceBackend(const ModelPool& pool, const TraceTable& table)
    : pool_(pool), table_(table) {
  const auto& ids = table.model_ids();
  for (const auto& m : pool)
    if (std::find(ids.begin(), ids.end(), m.id) == ids.end())
      throw BackendError("trace has no rows for model '" + m.id + "'");
}

PullResult TraceBackend::evaluate(ArmIndex arm, const std::string& sample_id) {
  const auto& m = pool_[arm];
  return {arm, sample_id, table_.at(m.id, sample_id), m.complexity_mmac};
}

double synthetic_uniform(std::uint64_t seed, ArmIndex arm, std::string_view sample_id) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(arm));
  h = splitmix64(h ^ fnv1a64(sample_id));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

SyntheticBackend::SyntheticBackend(const ModelPool& pool, std::vector<double> accuracies,
                                   std::uint64_t seed)
    : pool_(pool), accuracies_(std::move(accuracies)), seed_(seed) {
  if (accuracies_.size() != pool.size())
    throw ValidationError("accuracies", "synthetic: one accuracy per arm required");
  for (double p : accuracies_)
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError("accuracies", "synthetic: accuracies must lie in [0,1]");
}

PullResult SyntheticBackend::evaluate(ArmIndex arm, const std::string& sample_id) {
  const bool correct = synthetic_uniform(seed_, arm, sample_id) < accuracies_[arm];
  return {arm, sample_id, correct, pool_[arm].complexity_mmac};
}

namespace {

std::string padded(char prefix, std::size_t index, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t c = count > 0 ? count - 1 : 0; c >= 10; c /= 10) ++width;
  auto digits = std::to_string(index);
  return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') +
         digits;
}

}  // namespace

std::string synthetic_sample_id(std::size_t index, std::size_t count) {
  return padded('s', index, count);
}

std::string synthetic_model_id(std::size_t index, std::size_t count) {
  return padded('m', index, count);
}

SyntheticFixture generate_synthetic(const SyntheticSpec& spec, std::size_t arms) {
  if (arms == 0) throw ValidationError("arms", "synthetic: need at least one arm");
  if (spec.samples == 0) throw ValidationError("samples", "synthetic: need at least one sample");
  if (!spec.accuracies.empty() && spec.accuracies.size() != arms)
    throw ValidationError("accuracies", "synthetic: one accuracy per arm required");

  boost::random::mt19937_64 rng(spec.seed);
  boost::random::uniform_real_distribution<double> unit(0.0, 1.0);
  boost::random::uniform_real_distribution<double> jitter(-0.05, 0.05);
  auto log_uniform = [](double u, double lo, double hi) {
    return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
  };

  std::vector<ModelCandidate> candidates;
  std::vector<double> accuracies;
  for (std::size_t i = 0; i < arms; ++i) {
    const double u_size = unit(rng);
    const double u_complexity = unit(rng);
    const double bench_noise = jitter(rng);
    const double target_noise = jitter(rng);
    ModelCandidate c;
    c.id = synthetic_model_id(i, arms);
    c.size_mb = std::clamp(round_decimal(log_uniform(u_size, kMinSizeMb, kMaxSizeMb), 10.0),
                           kMinSizeMb, kMaxSizeMb);
    c.complexity_mmac = std::clamp(
        std::round(log_uniform(u_complexity, kMinComplexityMmac, kMaxComplexityMmac)),
        kMinComplexityMmac, kMaxComplexityMmac);
    // Larger models tend to be more accurate, on the benchmark and on target.
    c.benchmark_accuracy = std::clamp(round_decimal(0.55 + 0.30 * u_size + bench_noise, 1000.0), 0.0, 1.0);
    c.source = "synthetic";
    accuracies.push_back(
        spec.accuracies.empty()
            ? std::clamp(round_decimal(0.10 + 0.35 * u_size + target_noise, 1000.0), 0.0, 1.0)
            : spec.accuracies[i]);
    candidates.push_back(std::move(c));
  }

  ModelPool pool(std::move(candidates));
  Dataset dataset = synthetic_dataset(spec.samples);
  TraceTable table = synthetic_table(pool, accuracies, dataset, spec.seed);
  return {std::move(pool), std::move(table), std::move(dataset), std::move(accuracies)};
}

TraceTable synthetic_table(const ModelPool& pool, std::span<const double> accuracies,
                           const Dataset& dataset, std::uint64_t seed) {
  SyntheticBackend backend(pool, std::vector<double>(accuracies.begin(), accuracies.end()), seed);
  TraceTable table;
  for (ArmIndex a = 0; a < pool.size(); ++a)
    for (const auto& s : dataset.ids()) table.insert(pool[a].id, s, backend.evaluate(a, s).correct);
  return table;
}

Dataset synthetic_dataset(std::size_t samples) {
  if (samples == 0) throw ValidationError("samples", "synthetic: need at least one sample");
  std::vector<std::string> ids;
  ids.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) ids.push_back(synthetic_sample_id(s, samples));
  return Dataset(std::move(ids));
}

RemoteBackend::RemoteBackend(std::string base_url, const ModelPool& pool)
    : base_url_(std::move(base_url)),
      pool_(pool),
      client_(std::make_unique<httplib::Client>(base_url_)) {
  client_->set_connection_timeout(5);
  client_->set_read_timeout(60);
}

RemoteBackend::~RemoteBackend() = default;

PullResult RemoteBackend::evaluate(ArmIndex arm, const std::string& sample_id) {
  return evaluate_batch(arm, std::span<const std::string>(&sample_id, 1)).front();
}

std::vector<PullResult> RemoteBackend::evaluate_batch(ArmIndex arm,
                                                      std::span<const std::string> sample_ids) {
  const auto& model = pool_[arm];
  const std::string first = sample_ids.empty() ? "" : sample_ids.front();
  const std::string where = "remote evaluate " + pair_label(model.id, first);
  Json body = {{"model_id", model.id},
               {"sample_ids", std::vector<std::string>(sample_ids.begin(), sample_ids.end())}};

  httplib::Result res;
  {
    std::lock_guard lock(mutex_);
    ++requests_;
    res = client_->Post("/evaluate", body.dump(), "application/json");
  }
  if (!res) throw BackendError(where + ": transport error: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    std::string detail = res->body;
    try {
      detail = Json::parse(res->body).at("error").get<std::string>();
    } catch (const std::exception&) {
    }
    throw BackendError(where + ": HTTP " + std::to_string(res->status) + ": " + detail);
  }

  std::unordered_map<std::string, bool> bits;
  try {
    const auto doc = Json::parse(res->body);
    for (const auto& r : doc.at("results")) {
      const int c = r.at("correct").get<int>();
      if (c != 0 && c != 1) throw BackendError(where + ": correct must be 0 or 1");
      bits[r.at("sample_id").get<std::string>()] = c == 1;
    }
  } catch (const Json::exception& e) {
    throw BackendError(where + ": protocol error: " + e.what());
  }
  std::vector<PullResult> out;
  out.reserve(sample_ids.size());
  for (const auto& s : sample_ids) {
    auto it = bits.find(s);
    if (it == bits.end())
      throw BackendError("remote evaluate " + pair_label(model.id, s) + ": missing from response");
    out.push_back({arm, s, it->second, model.complexity_mmac});
  }
  return out;
}

ModelPool fetch_remote_pool(const std::string& base_url) {
  httplib::Client client(base_url);
  client.set_connection_timeout(5);
  auto res = client.Get("/models");
  if (!res) throw BackendError("remote GET /models: transport error: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw BackendError("remote GET /models: HTTP " + std::to_string(res->status));
  return load_pool(res->body);
}

}  // namespace zoosel
