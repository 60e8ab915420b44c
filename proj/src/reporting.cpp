#include "zoosel/reporting.hpp"

#include <algorithm>
#include <map>

namespace zoosel {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::bandit:
      return "bandit";
    case Method::brute_force:
      return "brute_force";
    case Method::benchmark:
      return "benchmark";
  }
  return "?";
}

namespace {

Method parse_method(std::string_view s) {
  if (s == "bandit") return Method::bandit;
  if (s == "brute_force") return Method::brute_force;
  if (s == "benchmark") return Method::benchmark;
  throw ParseError("report: unknown method '" + std::string(s) + "'");
}

Json weights_json(const MetricWeights& w) {
  return {{"accuracy", w.accuracy}, {"size", w.size}, {"complexity", w.complexity}};
}

MetricWeights weights_from_json(const Json& j) {
  return {j.at("accuracy").get<double>(), j.at("size").get<double>(),
          j.at("complexity").get<double>()};
}

Json config_echo(Method m, const ExperimentConfig& c) {
  if (m == Method::bandit) return to_json(c);
  return {{"weights", weights_json(c.weights)}};
}

template <typename F>
auto reading(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::vector<std::int64_t> SelectionReport::pulls_per_arm() const {
  std::vector<std::int64_t> out(ranking.size(), 0);
  for (const auto& r : ranking) out.at(r.arm) = r.pulls;
  return out;
}

Savings compute_savings(std::span<const std::int64_t> pulls_per_arm, const ModelPool& pool,
                        std::size_t dataset_size) {
  if (pulls_per_arm.size() != pool.size())
    throw ValidationError("pulls", "savings: one pull count per arm required");
  if (dataset_size == 0) throw ValidationError("dataset", "savings: dataset is empty");
  double pulls = 0.0;
  double spent = 0.0;
  double all = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    pulls += static_cast<double>(pulls_per_arm[i]);
    spent += static_cast<double>(pulls_per_arm[i]) * pool[i].complexity_mmac;
    all += pool[i].complexity_mmac;
  }
  const double n = static_cast<double>(dataset_size);
  const double k = static_cast<double>(pool.size());
  return {1.0 - pulls / (k * n), 1.0 - spent / (n * all)};
}

void sort_ranking(std::vector<RankedArm>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const RankedArm& a, const RankedArm& b) {
    if (a.estimated_value != b.estimated_value) return a.estimated_value > b.estimated_value;
    return a.arm < b.arm;
  });
}

AggregateReport aggregate(std::span<const SelectionReport> reports, const ModelPool& pool,
                          const std::optional<std::vector<double>>& exact_accuracies) {
  if (reports.empty()) throw ValidationError("reports", "aggregate: no reports");
  const auto k = pool.size();
  if (exact_accuracies && exact_accuracies->size() != k)
    throw ValidationError("accuracies", "aggregate: one exact accuracy per arm required");
  for (const auto& r : reports) {
    bool same = r.ranking.size() == k && r.dataset_size == reports.front().dataset_size;
    for (const auto& row : r.ranking)
      same = same && row.arm < k && row.id == pool[row.arm].id;
    if (!same) throw ValidationError("reports", "aggregate: reports come from different pools");
  }

  // Integer tallies keep the result independent of report order.
  std::vector<std::int64_t> wins(k, 0);
  std::vector<std::int64_t> pulls(k, 0);
  std::map<ArmIndex, std::vector<double>> estimates;
  for (const auto& r : reports) {
    ++wins[r.top()];
    for (const auto& row : r.ranking) pulls[row.arm] += row.pulls;
    if (!exact_accuracies) estimates[r.top()].push_back(r.ranking.front().accuracy);
  }

  // The lowest-seed run represents the study, whatever the report order.
  const auto& first = *std::min_element(reports.begin(), reports.end(), [](auto& a, auto& b) {
    return a.config.seed < b.config.seed;
  });
  const auto scores = normalize_static(pool);
  const double reps = static_cast<double>(reports.size());

  AggregateReport out;
  out.method = first.method;
  out.config = first.config;
  out.repetitions = static_cast<std::int64_t>(reports.size());
  out.dataset_size = first.dataset_size;
  out.exact_accuracy = exact_accuracies.has_value();

  std::vector<double> mean_pulls(k);
  std::int64_t pulls_total = 0;
  for (ArmIndex a = 0; a < k; ++a) {
    mean_pulls[a] = static_cast<double>(pulls[a]) / reps;
    pulls_total += pulls[a];
    out.arms.push_back({a, pool[a].id, static_cast<double>(wins[a]) / reps, mean_pulls[a]});
    if (wins[a] == 0) continue;
    double acc_sum = 0.0;
    if (exact_accuracies) {
      acc_sum = static_cast<double>(wins[a]) * (*exact_accuracies)[a];
    } else {
      auto& e = estimates[a];
      std::sort(e.begin(), e.end());
      for (double v : e) acc_sum += v;
    }
    out.mean_top_accuracy += acc_sum / reps;
    out.mean_top_size_mb += static_cast<double>(wins[a]) * pool[a].size_mb / reps;
    out.mean_top_complexity_mmac += static_cast<double>(wins[a]) * pool[a].complexity_mmac / reps;
    out.mean_top_value += (first.config.weights.accuracy * acc_sum +
                           static_cast<double>(wins[a]) * static_term(scores, a, first.config.weights)) /
                          reps;
  }
  out.mean_pulls_total = static_cast<double>(pulls_total) / reps;

  // Savings are linear in the pull counts, so the mean of per-run savings is
  // the savings of the mean pulls.
  if (first.dataset_size > 0) {
    const double n = static_cast<double>(first.dataset_size);
    double spent = 0.0;
    double all = 0.0;
    for (ArmIndex a = 0; a < k; ++a) {
      spent += mean_pulls[a] * pool[a].complexity_mmac;
      all += pool[a].complexity_mmac;
    }
    out.mean_savings = {1.0 - out.mean_pulls_total / (static_cast<double>(k) * n),
                        1.0 - spent / (n * all)};
  } else {
    out.mean_savings = first.savings;
  }
  out.representative = first;
  return out;
}

Json to_json(const ExperimentConfig& c) {
  return {{"strategy", std::string(to_string(c.strategy))},
          {"budget", c.budget},
          {"epsilon", c.epsilon},
          {"seed", c.seed},
          {"weights", weights_json(c.weights)},
          {"repetitions", c.repetitions}};
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  c.weights = weights_from_json(j.at("weights"));
  if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (j.contains("budget")) c.budget = j.at("budget").get<std::int64_t>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("repetitions")) c.repetitions = j.at("repetitions").get<std::int64_t>();
  return c;
}

Json to_json(const SelectionReport& r) {
  Json ranking = Json::array();
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    const auto& row = r.ranking[i];
    ranking.push_back({{"rank", i + 1},
                       {"arm", row.arm},
                       {"id", row.id},
                       {"estimated_value", row.estimated_value},
                       {"accuracy", row.accuracy},
                       {"pulls", row.pulls},
                       {"successes", row.successes},
                       {"size_mb", row.size_mb},
                       {"complexity_mmac", row.complexity_mmac}});
  }
  return {{"kind", "selection"},
          {"method", std::string(to_string(r.method))},
          {"config", config_echo(r.method, r.config)},
          {"dataset_size", r.dataset_size},
          {"ranking", std::move(ranking)},
          {"pulls_total", r.pulls_total},
          {"cost_mmac", r.cost_mmac},
          {"eval_savings", r.savings.eval},
          {"compute_savings_mmac", r.savings.compute_mmac}};
}

SelectionReport selection_report_from_json(const Json& j) {
  return reading("selection report", [&] {
    if (j.at("kind") != "selection") throw ParseError("report: not a selection report");
    SelectionReport r;
    r.method = parse_method(j.at("method").get<std::string>());
    r.config = config_from_json(j.at("config"));
    r.dataset_size = j.at("dataset_size").get<std::size_t>();
    for (const auto& row : j.at("ranking"))
      r.ranking.push_back({row.at("arm").get<ArmIndex>(), row.at("id").get<std::string>(),
                           row.at("estimated_value").get<double>(), row.at("accuracy").get<double>(),
                           row.at("pulls").get<std::int64_t>(), row.at("successes").get<std::int64_t>(),
                           row.at("size_mb").get<double>(), row.at("complexity_mmac").get<double>()});
    r.pulls_total = j.at("pulls_total").get<std::int64_t>();
    r.cost_mmac = j.at("cost_mmac").get<double>();
    r.savings = {j.at("eval_savings").get<double>(), j.at("compute_savings_mmac").get<double>()};
    return r;
  });
}

Json to_json(const AggregateReport& r) {
  Json arms = Json::array();
  for (const auto& a : r.arms)
    arms.push_back({{"arm", a.arm},
                    {"id", a.id},
                    {"selection_frequency", a.selection_frequency},
                    {"mean_pulls", a.mean_pulls}});
  return {{"kind", "aggregate"},
          {"method", std::string(to_string(r.method))},
          {"config", config_echo(r.method, r.config)},
          {"repetitions", r.repetitions},
          {"dataset_size", r.dataset_size},
          {"arms", std::move(arms)},
          {"top_arm",
           {{"mean_target_accuracy", r.mean_top_accuracy},
            {"target_accuracy_source", r.exact_accuracy ? "exact" : "estimate"},
            {"mean_size_mb", r.mean_top_size_mb},
            {"mean_complexity_mmac", r.mean_top_complexity_mmac},
            {"mean_value", r.mean_top_value}}},
          {"mean_pulls_total", r.mean_pulls_total},
          {"mean_eval_savings", r.mean_savings.eval},
          {"mean_compute_savings_mmac", r.mean_savings.compute_mmac},
          {"representative_run", to_json(r.representative)}};
}

AggregateReport aggregate_report_from_json(const Json& j) {
  return reading("aggregate report", [&] {
    if (j.at("kind") != "aggregate") throw ParseError("report: not an aggregate report");
    AggregateReport r;
    r.method = parse_method(j.at("method").get<std::string>());
    r.config = config_from_json(j.at("config"));
    r.repetitions = j.at("repetitions").get<std::int64_t>();
    r.dataset_size = j.at("dataset_size").get<std::size_t>();
    for (const auto& a : j.at("arms"))
      r.arms.push_back({a.at("arm").get<ArmIndex>(), a.at("id").get<std::string>(),
                        a.at("selection_frequency").get<double>(), a.at("mean_pulls").get<double>()});
    const auto& top = j.at("top_arm");
    r.mean_top_accuracy = top.at("mean_target_accuracy").get<double>();
    r.exact_accuracy = top.at("target_accuracy_source") == "exact";
    r.mean_top_size_mb = top.at("mean_size_mb").get<double>();
    r.mean_top_complexity_mmac = top.at("mean_complexity_mmac").get<double>();
    r.mean_top_value = top.at("mean_value").get<double>();
    r.mean_pulls_total = j.at("mean_pulls_total").get<double>();
    r.mean_savings = {j.at("mean_eval_savings").get<double>(),
                      j.at("mean_compute_savings_mmac").get<double>()};
    r.representative = selection_report_from_json(j.at("representative_run"));
    return r;
  });
}

std::string serialize_report(const SelectionReport& report) { return to_canonical(to_json(report)); }
std::string serialize_report(const AggregateReport& report) { return to_canonical(to_json(report)); }

SelectionReport deserialize_selection_report(std::string_view text) {
  return selection_report_from_json(parse_json(text, "report"));
}

AggregateReport deserialize_aggregate_report(std::string_view text) {
  return aggregate_report_from_json(parse_json(text, "report"));
}

}  // namespace zoosel
