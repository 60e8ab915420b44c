#include "zoosel/service.hpp"

#include <fstream>
#include <functional>

#include <httplib.h>

#include "zoosel/bandit.hpp"
#include "zoosel/csv.hpp"
#include "zoosel/eval_backend.hpp"
#include "zoosel/study.hpp"

namespace zoosel {

struct Service::Fixture {
  std::string kind;  // "pool" or "trace"
  std::string digest;
  std::shared_ptr<const ModelPool> pool;
  std::shared_ptr<const LoadedTrace> trace;
};

struct Service::Experiment {
  std::string id;
  ExperimentConfig config;
  std::shared_ptr<const ModelPool> pool;
  std::shared_ptr<const TraceTable> table;
  std::shared_ptr<const Dataset> dataset;
  std::optional<std::vector<double>> exact;
  std::int64_t total = 0;
  std::atomic<std::int64_t> completed{0};

  // Guarded by Service::mutex_.
  std::string status = "pending";
  std::vector<RankedArm> leaderboard;
  std::optional<AggregateReport> report;
  std::string error;
};

namespace {

constexpr const char* kJson = "application/json";

class NotFound : public Error {
 public:
  using Error::Error;
};

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(to_canonical(body), kJson);
}

void reply_error(httplib::Response& res, int status, const std::string& message,
                 const std::string& field = {}) {
  Json body = {{"error", message}};
  if (!field.empty()) body["field"] = field;
  reply(res, status, body);
}

std::string content_digest(const std::string& body) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016zx", std::hash<std::string>{}(body));
  return buf;
}

const Json& require(const Json& body, const char* field) {
  if (!body.contains(field)) throw ValidationError(field, std::string(field) + ": required");
  return body[field];
}

std::int64_t integer_field(const Json& body, const char* field, std::int64_t fallback) {
  if (!body.contains(field)) return fallback;
  const auto& v = body[field];
  if (!v.is_number_integer())
    throw ValidationError(field, std::string(field) + ": must be an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
    throw ValidationError(field, std::string(field) + ": out of range");
  return v.get<std::int64_t>();
}

MetricWeights parse_weights(const Json& v) {
  auto number = [](const Json& x) {
    if (!x.is_number()) throw ValidationError("weights", "weights: components must be numbers");
    return x.get<double>();
  };
  if (v.is_array() && v.size() == 3) return {number(v[0]), number(v[1]), number(v[2])};
  if (v.is_object() && v.contains("accuracy") && v.contains("size") && v.contains("complexity"))
    return {number(v["accuracy"]), number(v["size"]), number(v["complexity"])};
  throw ValidationError("weights", "weights: expected {accuracy,size,complexity} or a 3-array");
}

ExperimentConfig parse_config(const Json& body) {
  ExperimentConfig c;
  const auto& strategy = require(body, "strategy");
  if (!strategy.is_string()) throw ValidationError("strategy", "strategy: must be a string");
  c.strategy = parse_strategy(strategy.get<std::string>());
  require(body, "budget");
  c.budget = integer_field(body, "budget", 0);
  c.weights = parse_weights(require(body, "weights"));
  if (body.contains("seed")) {
    const auto& s = body["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ValidationError("seed", "seed: must be a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.repetitions = integer_field(body, "repetitions", 1);
  if (body.contains("epsilon")) {
    if (!body["epsilon"].is_number()) throw ValidationError("epsilon", "epsilon: must be a number");
    c.epsilon = body["epsilon"].get<double>();
  }
  validate(c);
  return c;
}

Json leaderboard_json(const std::vector<RankedArm>& rows) {
  Json out = Json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out.push_back({{"rank", i + 1},
                   {"arm", r.arm},
                   {"id", r.id},
                   {"estimated_value", r.estimated_value},
                   {"accuracy", r.accuracy},
                   {"pulls", r.pulls},
                   {"size_mb", r.size_mb},
                   {"complexity_mmac", r.complexity_mmac}});
  }
  return out;
}

}  // namespace

Service::Service(Options options) : options_(std::move(options)) {
  if (options_.persist_dir) std::filesystem::create_directories(*options_.persist_dir);
}

Service::~Service() { wait_idle(); }

void Service::wait_idle() {
  for (;;) {
    std::vector<std::jthread> done;
    {
      std::lock_guard lock(mutex_);
      if (workers_.empty()) return;
      done.swap(workers_);
    }
    for (auto& t : done) t.join();
  }
}

std::shared_ptr<const Service::Fixture> Service::fixture(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = fixtures_.find(name);
  return it == fixtures_.end() ? nullptr : it->second;
}

std::shared_ptr<Service::Experiment> Service::experiment(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = experiments_.find(id);
  return it == experiments_.end() ? nullptr : it->second;
}

Json Service::record_json(const Experiment& e) const {
  // Caller holds mutex_.
  Json j = {{"id", e.id},
            {"status", e.status},
            {"config", to_json(e.config)},
            {"progress", {{"completed", e.completed.load()}, {"total", e.total}}},
            {"leaderboard", leaderboard_json(e.leaderboard)}};
  if (!e.error.empty()) j["error"] = e.error;
  if (e.report) j["report"] = to_json(*e.report);
  return j;
}

std::string Service::launch(const Json& body) {
  if (!body.is_object()) throw ValidationError("body", "body: expected a JSON object");
  auto exp = std::make_shared<Experiment>();
  exp->config = parse_config(body);

  std::shared_ptr<const ModelPool> pool;
  if (body.contains("pool_ref")) {
    if (!body["pool_ref"].is_string()) throw ValidationError("pool_ref", "pool_ref: must be a string");
    auto f = fixture(body["pool_ref"].get<std::string>());
    if (!f || f->kind != "pool")
      throw NotFound("unknown pool fixture '" + body["pool_ref"].get<std::string>() + "'");
    pool = f->pool;
  }

  if (body.contains("trace_ref") == body.contains("synthetic_spec"))
    throw ValidationError("trace_ref", "exactly one of trace_ref and synthetic_spec is required");

  if (body.contains("trace_ref")) {
    if (!pool) throw ValidationError("pool_ref", "pool_ref: required with trace_ref");
    if (!body["trace_ref"].is_string()) throw ValidationError("trace_ref", "trace_ref: must be a string");
    auto f = fixture(body["trace_ref"].get<std::string>());
    if (!f || f->kind != "trace")
      throw NotFound("unknown trace fixture '" + body["trace_ref"].get<std::string>() + "'");
    auto trace = f->trace;
    exp->table = std::shared_ptr<const TraceTable>(trace, &trace->table);
    exp->dataset = std::shared_ptr<const Dataset>(trace, &trace->dataset);
    TraceBackend check(*pool, *exp->table);  // every pool model must appear in the trace
  } else {
    const auto& spec = body["synthetic_spec"];
    if (!spec.is_object()) throw ValidationError("synthetic_spec", "synthetic_spec: expected an object");
    SyntheticSpec s;
    const auto samples = integer_field(spec, "samples", 0);
    if (samples < 1) throw ValidationError("synthetic_spec", "synthetic_spec.samples: must be >= 1");
    s.samples = static_cast<std::size_t>(samples);
    s.seed = spec.contains("seed") ? spec["seed"].get<std::uint64_t>() : 0;
    if (spec.contains("accuracies")) {
      if (!spec["accuracies"].is_array())
        throw ValidationError("synthetic_spec", "synthetic_spec.accuracies: expected an array");
      for (const auto& p : spec["accuracies"]) {
        if (!p.is_number()) throw ValidationError("synthetic_spec", "synthetic_spec.accuracies: numbers only");
        s.accuracies.push_back(p.get<double>());
      }
    }
    if (pool) {
      if (s.accuracies.size() != pool->size())
        throw ValidationError("synthetic_spec", "synthetic_spec.accuracies: one per pool model required");
      auto dataset = std::make_shared<const Dataset>(synthetic_dataset(s.samples));
      exp->table = std::make_shared<const TraceTable>(synthetic_table(*pool, s.accuracies, *dataset, s.seed));
      exp->dataset = dataset;
    } else {
      const auto arms = integer_field(spec, "arms", 0);
      if (arms < 1) throw ValidationError("synthetic_spec", "synthetic_spec.arms: must be >= 1");
      auto fx = std::make_shared<SyntheticFixture>(generate_synthetic(s, static_cast<std::size_t>(arms)));
      pool = std::shared_ptr<const ModelPool>(fx, &fx->pool);
      exp->table = std::shared_ptr<const TraceTable>(fx, &fx->table);
      exp->dataset = std::shared_ptr<const Dataset>(fx, &fx->dataset);
    }
  }
  exp->pool = pool;
  exp->exact = exact_accuracies(*pool, *exp->table, *exp->dataset);
  exp->total = study_pull_count(exp->config, pool->size(), exp->dataset->size());

  std::lock_guard lock(mutex_);
  char id[32];
  std::snprintf(id, sizeof id, "exp-%06llu", static_cast<unsigned long long>(next_id_++));
  exp->id = id;
  experiments_[exp->id] = exp;
  workers_.emplace_back([this, exp] {
    {
      std::lock_guard l(mutex_);
      exp->status = "running";
    }
    try {
      TraceBackend backend(*exp->pool, *exp->table);
      const auto scores = normalize_static(*exp->pool);
      StudyOptions opts;
      opts.threads = options_.study_threads;
      opts.observer = [&](std::size_t, const BanditState& state) {
        const auto done = ++exp->completed;
        if (done % 256 != 0) return;
        auto rows = rank_arms(state, *exp->pool, scores, exp->config.weights);
        std::lock_guard l(mutex_);
        exp->leaderboard = std::move(rows);
      };
      auto report = run_study(exp->config, *exp->pool, backend, *exp->dataset, exp->exact, opts);
      std::lock_guard l(mutex_);
      exp->completed = exp->total;
      exp->leaderboard = report.representative.ranking;
      exp->report = std::move(report);
      exp->status = "done";
    } catch (const std::exception& e) {
      std::lock_guard l(mutex_);
      exp->error = e.what();
      exp->status = "failed";
    }
    if (options_.persist_dir) {
      std::string text;
      {
        std::lock_guard l(mutex_);
        text = to_canonical(record_json(*exp));
      }
      std::ofstream(*options_.persist_dir / (exp->id + ".json"), std::ios::binary) << text;
    }
  });
  return exp->id;
}

void Service::mount(httplib::Server& server) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  server.Put(R"(/api/fixtures/([A-Za-z0-9_.\-]+))", [this](const httplib::Request& req,
                                                           httplib::Response& res) {
    const std::string name = req.matches[1];
    auto fx = std::make_shared<Fixture>();
    fx->digest = content_digest(req.body);
    try {
      if (csv::lines(req.body).empty()) throw ParseError("empty fixture body");
      const auto first = req.body.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
      if (req.body.find("model_id,sample_id,correct") == first) {
        fx->kind = "trace";
        fx->trace = std::make_shared<const LoadedTrace>(load_trace(req.body));
      } else {
        fx->kind = "pool";
        fx->pool = std::make_shared<const ModelPool>(load_pool(req.body));
      }
    } catch (const Error& e) {
      return reply_error(res, 400, e.what());
    }
    std::lock_guard lock(mutex_);
    auto [it, inserted] = fixtures_.try_emplace(name, fx);
    if (!inserted && it->second->digest != fx->digest)
      return reply_error(res, 409, "fixture '" + name + "' already registered with other content");
    reply(res, inserted ? 201 : 200,
          {{"name", name}, {"kind", it->second->kind}, {"digest", it->second->digest}});
  });

  server.Post("/api/reason", [this](const httplib::Request& req, httplib::Response& res) {
    const Json body = Json::parse(req.body, nullptr, false);
    if (!body.is_object()) return reply_error(res, 400, "body: expected a JSON object");
    if (!body.contains("prompt") || !body["prompt"].is_string())
      return reply_error(res, 400, "prompt: required", "prompt");
    try {
      const auto samples = integer_field(body, "samples", 1);
      const bool offline = body.value("offline", false);
      auto opts = options_.reasoning;
      if (body.contains("allow_fallback")) opts.allow_fallback = body.value("allow_fallback", true);
      auto proposal = propose_weights(body["prompt"].get<std::string>(), samples,
                                      offline ? nullptr : options_.llm, opts);
      reply(res, 200, to_json(proposal));
    } catch (const ValidationError& e) {
      reply_error(res, 400, e.what(), e.field());
    } catch (const LlmTransportError& e) {
      reply_error(res, 502, e.what());
    }
  });

  server.Post("/api/experiments", [this](const httplib::Request& req, httplib::Response& res) {
    const Json body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return reply_error(res, 400, "body: malformed JSON");
    try {
      const auto id = launch(body);
      reply(res, 202, {{"id", id}});
    } catch (const ValidationError& e) {
      reply_error(res, 400, e.what(), e.field());
    } catch (const NotFound& e) {
      reply_error(res, 404, e.what());
    } catch (const Json::exception& e) {
      reply_error(res, 400, e.what());
    } catch (const Error& e) {
      reply_error(res, 400, e.what());
    }
  });

  server.Get(R"(/api/experiments/([^/]+))", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
    auto e = experiment(req.matches[1]);
    if (!e) return reply_error(res, 404, "unknown experiment '" + std::string(req.matches[1]) + "'");
    std::lock_guard lock(mutex_);
    reply(res, 200, record_json(*e));
  });

  server.Get(R"(/api/experiments/([^/]+)/report)", [this](const httplib::Request& req,
                                                          httplib::Response& res) {
    auto e = experiment(req.matches[1]);
    if (!e) return reply_error(res, 404, "unknown experiment '" + std::string(req.matches[1]) + "'");
    std::lock_guard lock(mutex_);
    if (e->status != "done") return reply_error(res, 409, "experiment is " + e->status);
    res.status = 200;
    res.set_content(serialize_report(*e->report), kJson);
  });

  server.Delete(R"(/api/experiments/([^/]+))", [](const httplib::Request&, httplib::Response& res) {
    reply_error(res, 501, "experiment cancellation is not supported");
  });
}

}  // namespace zoosel
