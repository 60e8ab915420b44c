#include "zoosel/reasoning.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <thread>
#include <vector>

#include <httplib.h>

namespace zoosel {
namespace {

constexpr std::array<std::string_view, 6> kEdgeWords{"drone", "mobile", "embedded",
                                                      "edge",  "iot",    "battery"};
constexpr std::array<std::string_view, 4> kLatencyWords{"autonomous", "vehicle", "real-time",
                                                         "latency"};
constexpr std::array<std::string_view, 4> kServerWords{"server", "datacenter", "cloud", "offline"};

constexpr FallbackProfile kEdge{
    "edge", {0.63, 0.25, 0.21},
    "Accuracy still dominates: the device must act on correct detections.",
    "On-device storage and memory are limited, so smaller models are preferred.",
    "Compute drains the battery, so fewer operations per inference matter."};
constexpr FallbackProfile kLatency{
    "latency", {0.70, 0.10, 0.40},
    "Safety-relevant decisions need accurate predictions.",
    "Onboard hardware has room for larger weights.",
    "Inference latency tracks compute, so complexity carries high weight."};
constexpr FallbackProfile kServer{
    "server", {0.80, 0.10, 0.10},
    "Server deployments can favour the most accurate model.",
    "Storage is plentiful.",
    "Compute is plentiful, though cost still scales with it."};
constexpr FallbackProfile kBalanced{
    "balanced", {0.34, 0.33, 0.33},
    "No deployment constraint was recognised; accuracy is weighted evenly with cost.",
    "Size weighted evenly in the absence of constraints.",
    "Complexity weighted evenly in the absence of constraints."};

std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-') {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

template <std::size_t N>
bool mentions(const std::vector<std::string>& words, const std::array<std::string_view, N>& keys) {
  for (const auto& w : words) {
    std::string_view v = w;
    std::string_view singular = v.ends_with('s') ? v.substr(0, v.size() - 1) : v;
    for (auto k : keys)
      if (v == k || singular == k) return true;
  }
  return false;
}

// End of the JSON object starting at text[begin] == '{', or npos.
std::size_t matching_brace(std::string_view text, std::size_t begin) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return i;
    }
  }
  return std::string_view::npos;
}

double clamp_unit(double v, bool& clamped) {
  if (v < 0.0 || v > 1.0) {
    clamped = true;
    return std::clamp(v, 0.0, 1.0);
  }
  return v;
}

std::optional<ParsedResponse> parse_object(const Json& obj) {
  if (!obj.is_object()) return std::nullopt;
  for (const char* k : {"accuracy", "size", "complexity"})
    if (!obj.contains(k) || !obj[k].is_number()) return std::nullopt;
  ParsedResponse out;
  out.weights = {clamp_unit(obj["accuracy"].get<double>(), out.clamped),
                 clamp_unit(obj["size"].get<double>(), out.clamped),
                 clamp_unit(obj["complexity"].get<double>(), out.clamped)};
  if (obj.contains("justification")) {
    const auto& j = obj["justification"];
    if (j.is_string()) {
      out.justification["summary"] = j.get<std::string>();
    } else if (j.is_object()) {
      for (auto it = j.begin(); it != j.end(); ++it)
        if (it.value().is_string()) out.justification[it.key()] = it.value().get<std::string>();
    }
  }
  return out;
}

MetricWeights stddev_of(const std::vector<MetricWeights>& xs, const MetricWeights& mean) {
  if (xs.size() < 2) return {};
  MetricWeights ss;
  for (const auto& x : xs) {
    ss.accuracy += (x.accuracy - mean.accuracy) * (x.accuracy - mean.accuracy);
    ss.size += (x.size - mean.size) * (x.size - mean.size);
    ss.complexity += (x.complexity - mean.complexity) * (x.complexity - mean.complexity);
  }
  const double d = static_cast<double>(xs.size() - 1);
  return {std::sqrt(ss.accuracy / d), std::sqrt(ss.size / d), std::sqrt(ss.complexity / d)};
}

// Per-metric mean, held inside the samples' range against rounding.
MetricWeights mean_of(const std::vector<MetricWeights>& xs) {
  auto column = [&](double MetricWeights::*field) {
    double sum = 0.0;
    double lo = xs.front().*field;
    double hi = lo;
    for (const auto& x : xs) {
      sum += x.*field;
      lo = std::min(lo, x.*field);
      hi = std::max(hi, x.*field);
    }
    return std::clamp(sum / static_cast<double>(xs.size()), lo, hi);
  };
  return {column(&MetricWeights::accuracy), column(&MetricWeights::size),
          column(&MetricWeights::complexity)};
}

WeightProposal fallback_proposal(std::string_view prompt, std::int64_t n_samples) {
  const auto& profile = fallback_profile(prompt);
  WeightProposal p;
  p.weights = profile.weights;
  p.justification = {{"accuracy", std::string(profile.accuracy_note)},
                     {"size", std::string(profile.size_note)},
                     {"complexity", std::string(profile.complexity_note)}};
  p.provenance = Provenance::fallback;
  p.samples_used = n_samples;
  p.profile = profile.name;
  return p;
}

}  // namespace

HttpLlmClient::HttpLlmClient(std::string url, std::string token) : token_(std::move(token)) {
  auto scheme = url.find("://");
  auto path_at = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = url.substr(0, path_at);
  path_ = path_at == std::string::npos ? "/" : url.substr(path_at);
}

std::unique_ptr<HttpLlmClient> HttpLlmClient::from_environment() {
  const char* url = std::getenv(kLlmUrlEnv);
  if (!url || !*url) return nullptr;
  const char* token = std::getenv(kLlmTokenEnv);
  return std::make_unique<HttpLlmClient>(url, token ? token : "");
}

std::string HttpLlmClient::complete(std::string_view system, std::string_view user) {
  httplib::Client client(base_);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  const Json body = {{"system", system}, {"user", user}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw LlmTransportError("LLM request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw LlmTransportError("LLM endpoint returned HTTP " + std::to_string(res->status));
  return res->body;
}

ParsedResponse parse_llm_response(std::string_view text) {
  for (auto open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    const auto close = matching_brace(text, open);
    if (close == std::string_view::npos) continue;
    const Json obj = Json::parse(text.substr(open, close - open + 1), nullptr, false);
    if (obj.is_discarded()) continue;
    if (auto parsed = parse_object(obj)) {
      if (parsed->weights.total() == 0.0)
        throw ParseError("LLM response: all weights are zero");
      return *parsed;
    }
  }
  throw ParseError("LLM response: no object with numeric accuracy, size and complexity");
}

const FallbackProfile& fallback_profile(std::string_view prompt) {
  const auto words = tokens(prompt);
  if (mentions(words, kEdgeWords)) return kEdge;
  if (mentions(words, kLatencyWords)) return kLatency;
  if (mentions(words, kServerWords)) return kServer;
  return kBalanced;
}

MetricWeights fallback_weights(std::string_view prompt) { return fallback_profile(prompt).weights; }

std::string_view to_string(Provenance p) { return p == Provenance::llm ? "llm" : "fallback"; }

WeightProposal propose_weights(std::string_view prompt, std::int64_t n_samples, LlmClient* client,
                               const ReasoningOptions& options) {
  if (prompt.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw ValidationError("prompt", "prompt: must be nonempty");
  if (n_samples < 1) throw ValidationError("samples", "samples: must be >= 1");
  if (!client) return fallback_proposal(prompt, n_samples);

  const auto& retry = options.retry;
  auto pause = [&](std::chrono::milliseconds d) {
    if (retry.sleep) retry.sleep(d);
    else std::this_thread::sleep_for(d);
  };

  std::vector<MetricWeights> samples;
  std::optional<Justification> justification;
  bool clamped = false;
  std::string last_error = "no response";
  for (std::int64_t i = 0; i < n_samples; ++i) {
    std::optional<std::string> body;
    auto delay = retry.initial_backoff;
    for (int attempt = 0; attempt <= retry.retries && !body; ++attempt) {
      try {
        body = client->complete(kWeightsSystemPrompt, prompt);
      } catch (const LlmTransportError& e) {
        last_error = e.what();
        if (attempt < retry.retries) {
          pause(delay);
          delay = std::min(delay * 2, retry.max_backoff);
        }
      }
    }
    if (!body) continue;
    try {
      auto parsed = parse_llm_response(*body);
      samples.push_back(parsed.weights);
      clamped = clamped || parsed.clamped;
      if (!justification) justification = std::move(parsed.justification);
    } catch (const ParseError& e) {
      last_error = e.what();
    }
  }

  if (samples.empty()) {
    if (!options.allow_fallback) throw LlmTransportError("no usable LLM response: " + last_error);
    return fallback_proposal(prompt, n_samples);
  }
  WeightProposal p;
  p.weights = mean_of(samples);
  p.stddev = stddev_of(samples, p.weights);
  p.justification = std::move(*justification);
  p.provenance = Provenance::llm;
  p.samples_used = static_cast<std::int64_t>(samples.size());
  p.clamped = clamped;
  return p;
}

Json to_json(const WeightProposal& p) {
  Json j = {{"kind", "proposal"},
            {"weights",
             {{"accuracy", p.weights.accuracy},
              {"size", p.weights.size},
              {"complexity", p.weights.complexity}}},
            {"stddev",
             {{"accuracy", p.stddev.accuracy},
              {"size", p.stddev.size},
              {"complexity", p.stddev.complexity}}},
            {"justification", p.justification},
            {"provenance", std::string(to_string(p.provenance))},
            {"samples_used", p.samples_used},
            {"clamped", p.clamped}};
  if (!p.profile.empty()) j["profile"] = p.profile;
  return j;
}

WeightProposal proposal_from_json(const Json& j) {
  try {
    WeightProposal p;
    const auto& w = j.at("weights");
    p.weights = {w.at("accuracy").get<double>(), w.at("size").get<double>(),
                 w.at("complexity").get<double>()};
    const auto& s = j.at("stddev");
    p.stddev = {s.at("accuracy").get<double>(), s.at("size").get<double>(),
                s.at("complexity").get<double>()};
    p.justification = j.at("justification").get<Justification>();
    p.provenance = j.at("provenance") == "llm" ? Provenance::llm : Provenance::fallback;
    p.samples_used = j.at("samples_used").get<std::int64_t>();
    p.clamped = j.at("clamped").get<bool>();
    if (j.contains("profile")) p.profile = j.at("profile").get<std::string>();
    return p;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("proposal: ") + e.what());
  }
}

std::string serialize_proposal(const WeightProposal& p) { return to_canonical(to_json(p)); }

}  // namespace zoosel
