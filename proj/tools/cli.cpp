#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "zoosel/baselines.hpp"
#include "zoosel/reasoning.hpp"
#include "zoosel/service.hpp"
#include "zoosel/study.hpp"

namespace zoosel::cli {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw Error("cannot write '" + path.string() + "'");
}

// Where the evaluations come from, resolved from --pool/--trace/--remote/--dataset.
struct Inputs {
  std::string pool_path;
  std::string trace_path;
  std::string remote_url;
  std::string dataset_path;
};

struct Target {
  std::optional<ModelPool> pool;
  std::optional<LoadedTrace> trace;
  std::optional<Dataset> dataset;
  std::unique_ptr<EvalBackend> backend;
  std::optional<std::vector<double>> exact;
};

void add_inputs(CLI::App& cmd, Inputs& in) {
  cmd.add_option("--pool", in.pool_path, "Pool file (JSON array or CSV)");
  cmd.add_option("--trace", in.trace_path, "Trace CSV: model_id,sample_id,correct");
  cmd.add_option("--remote", in.remote_url, "Remote evaluator base URL");
  cmd.add_option("--dataset", in.dataset_path, "Sample ids, one per line (with --remote)");
}

Target open_target(const Inputs& in) {
  Target t;
  if (!in.trace_path.empty() == !in.remote_url.empty())
    throw ValidationError("trace", "give exactly one of --trace and --remote");
  if (!in.pool_path.empty()) t.pool.emplace(load_pool(read_file(in.pool_path)));
  if (!in.trace_path.empty()) {
    if (!t.pool) throw ValidationError("pool", "--pool is required with --trace");
    t.trace.emplace(load_trace(read_file(in.trace_path)));
    t.dataset.emplace(t.trace->dataset);
    t.backend = std::make_unique<TraceBackend>(*t.pool, t.trace->table);
    t.exact = exact_accuracies(*t.pool, t.trace->table, *t.dataset);
  } else {
    if (in.dataset_path.empty()) throw ValidationError("dataset", "--dataset is required with --remote");
    if (!t.pool) t.pool.emplace(fetch_remote_pool(in.remote_url));
    t.dataset.emplace(load_dataset(read_file(in.dataset_path)));
    t.backend = std::make_unique<RemoteBackend>(in.remote_url, *t.pool);
  }
  return t;
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("accuracies", "accuracies: not a number: '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budgeted pretrained-model selection with multi-armed bandits", "zoosel"};
  app.require_subcommand(1);
  std::string out_path;

  auto emit = [&](const std::string& text) {
    if (out_path.empty()) out << text;
    else write_file(out_path, text);
  };

  // reason
  auto* reason = app.add_subcommand("reason", "Propose trade-off weights for a use case");
  std::string prompt;
  std::int64_t samples = 1;
  bool offline = false;
  bool no_fallback = false;
  reason->add_option("--prompt", prompt, "Use-case description")->required();
  reason->add_option("--samples", samples, "LLM queries to average");
  reason->add_flag("--offline", offline, "Use the keyword fallback; no network access");
  reason->add_flag("--no-fallback", no_fallback, "Fail instead of falling back when the LLM fails");
  reason->add_option("--out", out_path, "Write the proposal here instead of stdout");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a budgeted bandit study");
  Inputs run_in;
  add_inputs(*run_cmd, run_in);
  std::string strategy = "thompson";
  std::string weights_text;
  ExperimentConfig config;
  std::size_t threads = 0;
  run_cmd->add_option("--strategy", strategy, "epsilon_greedy, ucb or thompson");
  run_cmd->add_option("--budget", config.budget, "Pulls per repetition")->required();
  run_cmd->add_option("--weights", weights_text, "accuracy,size,complexity")->required();
  run_cmd->add_option("--seed", config.seed, "Base seed; repetition r uses seed + r");
  run_cmd->add_option("--repetitions", config.repetitions, "Independent repetitions");
  run_cmd->add_option("--epsilon", config.epsilon, "Exploration rate for epsilon_greedy");
  run_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run_cmd->add_option("--out", out_path, "Write the report here instead of stdout");

  // brute-force
  auto* brute = app.add_subcommand("brute-force", "Evaluate every model on every sample");
  Inputs brute_in;
  add_inputs(*brute, brute_in);
  brute->add_option("--weights", weights_text, "accuracy,size,complexity")->required();
  brute->add_option("--out", out_path, "Write the report here instead of stdout");

  // bench-select
  auto* bench = app.add_subcommand("bench-select", "Rank by recorded benchmark accuracy");
  std::string pool_path;
  bench->add_option("--pool", pool_path, "Pool file")->required();
  bench->add_option("--weights", weights_text, "accuracy,size,complexity")->required();
  bench->add_option("--out", out_path, "Write the report here instead of stdout");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic pool and complete trace");
  std::size_t arms = 0;
  std::size_t gen_samples = 0;
  std::uint64_t gen_seed = 0;
  std::string accuracies_text;
  std::string out_dir;
  gen->add_option("--arms", arms, "Number of models")->required();
  gen->add_option("--samples", gen_samples, "Number of target samples")->required();
  gen->add_option("--seed", gen_seed, "Generation seed");
  gen->add_option("--accuracies", accuracies_text, "Comma-separated true accuracies, one per arm");
  gen->add_option("--out-dir", out_dir, "Directory for pool.json, trace.csv, truth.json")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Start the HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string persist;
  std::size_t serve_threads = 1;
  bool serve_offline = false;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--persist", persist, "Directory for finished experiment records");
  serve->add_option("--threads", serve_threads, "Worker threads per study");
  serve->add_flag("--offline", serve_offline, "Never contact the LLM endpoint");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*reason) {
      std::unique_ptr<LlmClient> client;
      if (!offline) client = HttpLlmClient::from_environment();
      ReasoningOptions opts;
      opts.allow_fallback = !no_fallback;
      emit(serialize_proposal(propose_weights(prompt, samples, client.get(), opts)));
    } else if (*run_cmd) {
      config.strategy = parse_strategy(strategy);
      config.weights = parse_weights_triple(weights_text);
      validate(config);
      auto t = open_target(run_in);
      StudyOptions opts;
      opts.threads = threads;
      emit(serialize_report(run_study(config, *t.pool, *t.backend, *t.dataset, t.exact, opts)));
    } else if (*brute) {
      const auto w = parse_weights_triple(weights_text);
      auto t = open_target(brute_in);
      emit(serialize_report(brute_force(*t.pool, *t.backend, *t.dataset, normalize_static(*t.pool), w)));
    } else if (*bench) {
      const auto w = parse_weights_triple(weights_text);
      const auto pool = load_pool(read_file(pool_path));
      emit(serialize_report(benchmark_select(pool, normalize_static(pool), w)));
    } else if (*gen) {
      SyntheticSpec spec{parse_reals(accuracies_text), gen_samples, gen_seed};
      if (accuracies_text.empty()) spec.accuracies.clear();
      auto fx = generate_synthetic(spec, arms);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      write_file(dir / "pool.json", save_pool(fx.pool));
      write_file(dir / "trace.csv", save_trace(fx.table));
      Json truth = {{"kind", "synthetic_truth"},
                    {"arms", arms},
                    {"samples", gen_samples},
                    {"seed", gen_seed},
                    {"accuracies", fx.accuracies},
                    {"files", {"pool.json", "trace.csv"}}};
      write_file(dir / "truth.json", to_canonical(truth));
      out << to_canonical(truth);
    } else if (*serve) {
      std::unique_ptr<LlmClient> client;
      if (!serve_offline) client = HttpLlmClient::from_environment();
      Service::Options opts;
      if (!persist.empty()) opts.persist_dir = persist;
      opts.study_threads = serve_threads;
      opts.llm = client.get();
      Service service(std::move(opts));
      httplib::Server server;
      service.mount(server);
      const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
      if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
      out << "listening on http://" << host << ":" << bound << std::endl;
      server.listen_after_bind();
    }
  } catch (const std::exception& e) {
    err << "zoosel: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace zoosel::cli
