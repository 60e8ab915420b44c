#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "zoosel/canonical_json.hpp"
#include "zoosel/core.hpp"

namespace zoosel {

// Sent verbatim as the system part of every LLM request.
inline constexpr std::string_view kWeightsSystemPrompt =
    "You select evaluation trade-off weights for choosing a pretrained model. Given the use case "
    "below, return only a JSON object with numeric fields accuracy, size, complexity in [0,1] and "
    "a string field justification.";

// Environment variables read by HttpLlmClient::from_environment().
inline constexpr const char* kLlmUrlEnv = "ZOOSEL_LLM_URL";
inline constexpr const char* kLlmTokenEnv = "ZOOSEL_LLM_TOKEN";

class LlmTransportError : public Error {
 public:
  using Error::Error;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Returns the raw response body; throws LlmTransportError on failure.
  virtual std::string complete(std::string_view system, std::string_view user) = 0;
};

// POSTs {"system": ..., "user": ...} as JSON to a configured endpoint.
class HttpLlmClient final : public LlmClient {
 public:
  HttpLlmClient(std::string url, std::string token);

  // nullptr when ZOOSEL_LLM_URL is unset or empty.
  static std::unique_ptr<HttpLlmClient> from_environment();

  std::string complete(std::string_view system, std::string_view user) override;

 private:
  std::string base_;
  std::string path_;
  std::string token_;
};

using Justification = std::map<std::string, std::string>;

struct ParsedResponse {
  MetricWeights weights;
  Justification justification;
  bool clamped = false;  // some weight was pulled back into [0,1]
};

// First JSON object in `text` carrying numeric accuracy, size and complexity.
// `justification` may be a string (stored under "summary") or an object of
// per-metric strings. Throws ParseError when no such object exists.
ParsedResponse parse_llm_response(std::string_view text);

struct FallbackProfile {
  std::string_view name;
  MetricWeights weights;
  std::string_view accuracy_note;
  std::string_view size_note;
  std::string_view complexity_note;
};

// Keyword lookup on the lowercased prompt; first matching profile wins:
// edge, latency, server, then balanced.
const FallbackProfile& fallback_profile(std::string_view prompt);
MetricWeights fallback_weights(std::string_view prompt);

enum class Provenance { llm, fallback };
std::string_view to_string(Provenance p);

struct WeightProposal {
  MetricWeights weights;
  Justification justification;
  Provenance provenance = Provenance::fallback;
  std::int64_t samples_used = 1;
  MetricWeights stddev;  // per-metric sample standard deviation
  bool clamped = false;
  std::string profile;  // fallback profile name; empty for llm
};

struct RetryPolicy {
  int retries = 2;  // per sample, after the first attempt
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{4000};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for
};

struct ReasoningOptions {
  RetryPolicy retry;
  bool allow_fallback = true;  // otherwise total failure throws LlmTransportError
};

// Queries `client` n_samples times and averages the parsed weights. A null
// client selects the offline fallback directly. If no sample parses, falls
// back (or throws when fallback is disabled).
WeightProposal propose_weights(std::string_view prompt, std::int64_t n_samples, LlmClient* client,
                               const ReasoningOptions& options = {});

Json to_json(const WeightProposal& p);
WeightProposal proposal_from_json(const Json& doc);
std::string serialize_proposal(const WeightProposal& p);

}  // namespace zoosel
