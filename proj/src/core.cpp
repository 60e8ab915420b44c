#include "zoosel/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "zoosel/canonical_json.hpp"
#include "zoosel/csv.hpp"

namespace zoosel {
namespace {

std::string record_label(std::size_t index, const std::string& id) {
  return "pool record " + std::to_string(index) + (id.empty() ? "" : " ('" + id + "')");
}

void validate_candidate(const ModelCandidate& c, std::size_t index) {
  const auto label = record_label(index, c.id);
  if (c.id.empty()) throw ValidationError("id", label + ": empty id");
  if (!(c.benchmark_accuracy >= 0.0 && c.benchmark_accuracy <= 1.0))
    throw ValidationError("benchmark_accuracy", label + ": benchmark_accuracy outside [0,1]");
  if (!(c.size_mb > 0.0) || !std::isfinite(c.size_mb))
    throw ValidationError("size_mb", label + ": size_mb must be positive");
  if (!(c.complexity_mmac > 0.0) || !std::isfinite(c.complexity_mmac))
    throw ValidationError("complexity_mmac", label + ": complexity_mmac must be positive");
}

double parse_real(std::string_view text, std::string_view context) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(std::string(context) + ": not a number: '" + std::string(text) + "'");
  return value;
}

constexpr std::string_view kPoolHeader = "id,benchmark_accuracy,size_mb,complexity_mmac,source";

std::vector<ModelCandidate> parse_pool_json(std::string_view text) {
  const Json doc = parse_json(text, "pool file");
  if (!doc.is_array()) throw ParseError("pool file: expected an array of records");
  std::vector<ModelCandidate> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& rec = doc[i];
    const auto label = "pool record " + std::to_string(i);
    if (!rec.is_object()) throw ParseError(label + ": expected an object");
    for (auto it = rec.begin(); it != rec.end(); ++it) {
      const auto& k = it.key();
      if (k != "id" && k != "benchmark_accuracy" && k != "size_mb" && k != "complexity_mmac" &&
          k != "source")
        throw ParseError(label + ": unknown field '" + k + "'");
    }
    auto number = [&](const char* key) {
      if (!rec.contains(key) || !rec[key].is_number())
        throw ParseError(label + ": missing numeric field '" + key + "'");
      return rec[key].get<double>();
    };
    if (!rec.contains("id") || !rec["id"].is_string())
      throw ParseError(label + ": missing string field 'id'");
    ModelCandidate c;
    c.id = rec["id"].get<std::string>();
    c.benchmark_accuracy = number("benchmark_accuracy");
    c.size_mb = number("size_mb");
    c.complexity_mmac = number("complexity_mmac");
    if (rec.contains("source")) {
      if (!rec["source"].is_string()) throw ParseError(label + ": 'source' must be a string");
      c.source = rec["source"].get<std::string>();
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ModelCandidate> parse_pool_csv(std::string_view text) {
  auto rows = csv::lines(text);
  if (rows.empty()) throw ParseError("pool file: empty");
  // The source column is optional in CSV form.
  const bool with_source = rows[0] == kPoolHeader;
  if (!with_source && rows[0] != kPoolHeader.substr(0, kPoolHeader.rfind(',')))
    throw ParseError("pool file: unexpected CSV header '" + std::string(rows[0]) + "'");
  const std::size_t width = with_source ? 5 : 4;
  std::vector<ModelCandidate> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto label = "pool record " + std::to_string(r - 1);
    auto f = csv::split_record(rows[r]);
    if (f.size() != width)
      throw ParseError(label + ": expected " + std::to_string(width) + " fields, got " +
                       std::to_string(f.size()));
    ModelCandidate c;
    c.id = f[0];
    c.benchmark_accuracy = parse_real(f[1], label);
    c.size_mb = parse_real(f[2], label);
    c.complexity_mmac = parse_real(f[3], label);
    if (with_source) c.source = f[4];
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

ModelPool::ModelPool(std::vector<ModelCandidate> candidates) : candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw ValidationError("pool", "model pool is empty");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    validate_candidate(candidates_[i], i);
    if (!seen.insert(candidates_[i].id).second)
      throw ValidationError("id", record_label(i, candidates_[i].id) + ": duplicate id '" +
                                      candidates_[i].id + "'");
  }
}

void validate_weights(const MetricWeights& w) {
  for (double v : {w.accuracy, w.size, w.complexity})
    if (!(v >= 0.0 && v <= 1.0))
      throw ValidationError("weights", "weights: each component must lie in [0,1]");
  if (w.accuracy == 0.0 && w.size == 0.0 && w.complexity == 0.0)
    throw ValidationError("weights", "weights: at least one component must be positive");
}

MetricWeights parse_weights_triple(std::string_view text) {
  auto f = csv::split_record(text);
  if (f.size() != 3)
    throw ValidationError("weights", "weights: expected accuracy,size,complexity");
  MetricWeights w{parse_real(f[0], "weights"), parse_real(f[1], "weights"),
                  parse_real(f[2], "weights")};
  validate_weights(w);
  return w;
}

StaticScores normalize_static(const ModelPool& pool) {
  auto [smin, smax] = std::minmax_element(pool.begin(), pool.end(), [](auto& a, auto& b) {
    return a.size_mb < b.size_mb;
  });
  auto [cmin, cmax] = std::minmax_element(pool.begin(), pool.end(), [](auto& a, auto& b) {
    return a.complexity_mmac < b.complexity_mmac;
  });
  auto score = [](double v, double lo, double hi) {
    return hi == lo ? 1.0 : (hi - v) / (hi - lo);
  };
  std::vector<StaticScore> out;
  out.reserve(pool.size());
  for (const auto& c : pool)
    out.push_back({score(c.size_mb, smin->size_mb, smax->size_mb),
                   score(c.complexity_mmac, cmin->complexity_mmac, cmax->complexity_mmac)});
  return StaticScores(std::move(out));
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::epsilon_greedy:
      return "epsilon_greedy";
    case Strategy::ucb:
      return "ucb";
    case Strategy::thompson:
      return "thompson";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "epsilon_greedy" || name == "epsilon-greedy") return Strategy::epsilon_greedy;
  if (name == "ucb") return Strategy::ucb;
  if (name == "thompson") return Strategy::thompson;
  throw ValidationError("strategy", "strategy: expected epsilon_greedy, ucb or thompson, got '" +
                                        std::string(name) + "'");
}

void validate(const ExperimentConfig& config) {
  if (config.budget < 0) throw ValidationError("budget", "budget: must be nonnegative");
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0))
    throw ValidationError("epsilon", "epsilon: must lie in [0,1]");
  if (config.repetitions < 1) throw ValidationError("repetitions", "repetitions: must be >= 1");
  validate_weights(config.weights);
}

ModelPool load_pool(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[')
    return ModelPool(parse_pool_json(text));
  return ModelPool(parse_pool_csv(text));
}

std::string save_pool(const ModelPool& pool) {
  Json doc = Json::array();
  for (const auto& c : pool)
    doc.push_back({{"id", c.id},
                   {"benchmark_accuracy", c.benchmark_accuracy},
                   {"size_mb", c.size_mb},
                   {"complexity_mmac", c.complexity_mmac},
                   {"source", c.source}});
  return to_canonical(doc);
}

}  // namespace zoosel
