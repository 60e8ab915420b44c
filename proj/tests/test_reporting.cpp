#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "zoosel/bandit.hpp"
#include "zoosel/baselines.hpp"
#include "zoosel/error.hpp"
#include "zoosel/study.hpp"

using namespace zoosel;
using namespace zoosel::testing;

namespace {

ModelPool pool_with_complexities(std::vector<double> c) {
  std::vector<ModelCandidate> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(candidate("m" + std::to_string(i), 0.5, 10, c[i]));
  return ModelPool(out);
}

ExperimentConfig study_config(std::int64_t budget, MetricWeights w, std::uint64_t seed, std::int64_t reps) {
  ExperimentConfig c;
  c.strategy = Strategy::thompson;
  c.budget = budget;
  c.weights = w;
  c.seed = seed;
  c.repetitions = reps;
  return c;
}

}  // namespace

TEST_CASE("savings: brute force saves nothing") {
  const auto pool = pool_with_complexities({229, 5000, 127750});
  const std::vector<std::int64_t> pulls{50, 50, 50};
  const auto s = compute_savings(pulls, pool, 50);
  CHECK(s.eval == 0.0);
  CHECK(s.compute_mmac == 0.0);
}

TEST_CASE("savings: 2000 of 71 x 200 pulls") {
  const auto pool = pool_with_complexities(std::vector<double>(71, 1000));
  std::vector<std::int64_t> pulls(71, 0);
  for (int i = 0; i < 2000; ++i) ++pulls[i % 71];
  const auto s = compute_savings(pulls, pool, 200);
  // 1 - 2000/14200 = 61/71
  CHECK(std::abs(s.eval - 0.859154929577465) < 1e-12);
  CHECK(std::abs(s.eval - 61.0 / 71.0) < 1e-15);
}

TEST_CASE("savings: spending on the cheapest arm saves more compute") {
  const auto pool = pool_with_complexities({229, 127750});
  const std::vector<std::int64_t> pulls{100, 0};
  const auto s = compute_savings(pulls, pool, 200);
  CHECK(s.eval == doctest::Approx(0.75));
  CHECK(s.compute_mmac == doctest::Approx(1 - 100.0 * 229 / (200 * (229 + 127750.0))));
  CHECK(s.compute_mmac > s.eval);
}

TEST_CASE("property: savings behave") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + trial % 8;
    const std::size_t n = 1 + trial % 13;
    const auto equal = pool_with_complexities(std::vector<double>(k, 777));
    std::vector<std::int64_t> pulls(k);
    for (auto& p : pulls) p = std::uniform_int_distribution<std::int64_t>(0, n)(gen);
    const auto s = compute_savings(pulls, equal, n);
    CHECK(s.eval == doctest::Approx(s.compute_mmac).epsilon(1e-12));
    CHECK(s.eval >= 0.0);
    CHECK(s.eval <= 1.0);
    const bool full = std::all_of(pulls.begin(), pulls.end(), [&](auto p) { return p == std::int64_t(n); });
    CHECK((s.eval == 0.0) == full);
  }
}

TEST_CASE("property: eval savings fall strictly as the budget grows") {
  const auto fx = generate_synthetic({{}, 12, 2}, 5);
  SyntheticBackend backend(fx.pool, fx.accuracies, 2);
  double last = 2.0;
  for (std::int64_t budget = 0; budget <= 60; ++budget) {
    const auto r = run_experiment(study_config(budget, {0.6, 0.2, 0.2}, 3, 1), fx.pool, backend, fx.dataset);
    CHECK(r.savings.eval < last);
    last = r.savings.eval;
  }
  CHECK(last == 0.0);
}

TEST_CASE("aggregate: one run") {
  const auto fx = generate_synthetic({{}, 20, 6}, 4);
  TraceBackend backend(fx.pool, fx.table);
  const auto r = run_experiment(study_config(30, {1, 0, 0}, 1, 1), fx.pool, backend, fx.dataset);
  const std::vector<SelectionReport> one{r};
  const auto agg = aggregate(one, fx.pool, exact_accuracies(fx.pool, fx.table, fx.dataset));
  CHECK(agg.repetitions == 1);
  CHECK(agg.arms[r.top()].selection_frequency == 1.0);
  CHECK(agg.mean_top_accuracy == fx.table.accuracy(fx.pool[r.top()].id, fx.dataset));
  CHECK(agg.exact_accuracy);
}

TEST_CASE("aggregate: every run picks the same arm") {
  const auto fx = generate_synthetic({{1.0, 0.0, 0.0}, 20, 6}, 3);
  TraceBackend backend(fx.pool, fx.table);
  std::vector<SelectionReport> reports;
  for (std::uint64_t s = 0; s < 7; ++s)
    reports.push_back(run_experiment(study_config(60, {1, 0, 0}, s, 1), fx.pool, backend, fx.dataset));
  const auto agg = aggregate(reports, fx.pool, std::nullopt);
  CHECK(agg.arms[0].selection_frequency == 1.0);
  CHECK(agg.mean_top_size_mb == fx.pool[0].size_mb);
  CHECK(agg.mean_top_complexity_mmac == fx.pool[0].complexity_mmac);
  CHECK(agg.mean_top_accuracy == 1.0);
  CHECK_FALSE(agg.exact_accuracy);
}

TEST_CASE("aggregate: K=5 planted regime") {
  const auto fx = generate_synthetic({{0.9, 0.7, 0.5, 0.3, 0.1}, 200, 5}, 5);
  SyntheticBackend backend(fx.pool, fx.accuracies, 5);
  const auto agg = run_study(study_config(500, {1, 0, 0}, 42, 200), fx.pool, backend, fx.dataset,
                             exact_accuracies(fx.pool, fx.table, fx.dataset));
  CHECK(agg.arms[0].selection_frequency >= 0.90);
  double total = 0;
  for (const auto& a : agg.arms) total += a.selection_frequency;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("property: aggregation ignores report order") {
  const auto fx = generate_synthetic({{}, 30, 9}, 10);
  TraceBackend backend(fx.pool, fx.table);
  std::vector<SelectionReport> reports;
  for (std::uint64_t s = 0; s < 25; ++s)
    reports.push_back(run_experiment(study_config(60, {0.63, 0.25, 0.21}, s, 1), fx.pool, backend, fx.dataset));
  const auto exact = exact_accuracies(fx.pool, fx.table, fx.dataset);
  for (const auto& ex : {exact, std::optional<std::vector<double>>{}}) {
    const auto expect = serialize_report(aggregate(reports, fx.pool, ex));
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 20; ++trial) {
      auto shuffled = reports;
      std::shuffle(shuffled.begin(), shuffled.end(), gen);
      CHECK(serialize_report(aggregate(shuffled, fx.pool, ex)) == expect);
    }
  }
}

TEST_CASE("aggregate rejects mixed pools") {
  const auto a = generate_synthetic({{}, 10, 1}, 3);
  const auto b = generate_synthetic({{}, 10, 2}, 4);
  TraceBackend ba(a.pool, a.table), bb(b.pool, b.table);
  const std::vector<SelectionReport> mixed{
      run_experiment(study_config(5, {1, 0, 0}, 0, 1), a.pool, ba, a.dataset),
      run_experiment(study_config(5, {1, 0, 0}, 0, 1), b.pool, bb, b.dataset)};
  CHECK_THROWS_AS(aggregate(mixed, a.pool, std::nullopt), ValidationError);
  CHECK_THROWS_AS(aggregate(std::span<const SelectionReport>{}, a.pool, std::nullopt), ValidationError);
}

TEST_CASE("serialization fixpoint and round trip") {
  const auto fx = generate_synthetic({{}, 25, 14}, 6);
  TraceBackend backend(fx.pool, fx.table);
  const auto scores = normalize_static(fx.pool);
  const MetricWeights w{0.63, 0.25, 0.21};
  std::vector<SelectionReport> reports{
      run_experiment(study_config(40, w, 3, 1), fx.pool, backend, fx.dataset),
      brute_force(fx.pool, backend, fx.dataset, scores, w), benchmark_select(fx.pool, scores, w)};
  for (const auto& r : reports) {
    const auto text = serialize_report(r);
    CHECK(serialize_report(deserialize_selection_report(text)) == text);
  }
  const auto agg = run_study(study_config(40, w, 3, 9), fx.pool, backend, fx.dataset,
                             exact_accuracies(fx.pool, fx.table, fx.dataset));
  const auto text = serialize_report(agg);
  CHECK(serialize_report(deserialize_aggregate_report(text)) == text);
}

TEST_CASE("report text shape") {
  const auto fx = generate_synthetic({{}, 25, 14}, 3);
  TraceBackend backend(fx.pool, fx.table);
  const auto r = run_experiment(study_config(20, {1, 0, 0}, 3, 1), fx.pool, backend, fx.dataset);
  const auto j = Json::parse(serialize_report(r));
  CHECK(j.at("kind") == "selection");
  CHECK(j.at("method") == "bandit");
  CHECK(j.at("pulls_total") == 20);
  std::int64_t sum = 0;
  std::vector<std::string> ids;
  for (const auto& row : j.at("ranking")) {
    sum += row.at("pulls").get<std::int64_t>();
    ids.push_back(row.at("id"));
  }
  CHECK(sum == 20);
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<std::string>{"m0", "m1", "m2"});
  CHECK(j.at("eval_savings").get<double>() == doctest::Approx(1 - 20.0 / 75));
}

TEST_CASE("malformed report text") {
  CHECK_THROWS_AS(deserialize_selection_report("not json"), ParseError);
  CHECK_THROWS_AS(deserialize_selection_report("{}"), ParseError);
  CHECK_THROWS_AS(deserialize_aggregate_report(R"({"kind":"selection"})"), ParseError);
}

TEST_CASE("canonical JSON") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(61.0 / 71.0) == "0.85915493");
  CHECK(format_real(1e-12) == "1e-12");
  CHECK_THROWS(format_real(std::nan("")));
  const Json j = Json::parse(R"({"b":[1,2.5,{"z":1,"a":null}],"a":"x"})");
  const auto text = to_canonical(j);
  CHECK(text == "{\n  \"a\": \"x\",\n  \"b\": [\n    1,\n    2.5,\n    {\n      \"a\": null,\n      \"z\": 1\n    }\n  ]\n}\n");
  CHECK(to_canonical(Json::parse(text)) == text);
}

TEST_CASE("golden report: K=5 fixture, seed 42") {
  const auto pool = load_pool(read_text(fixture_path("k5_n200/pool.json")));
  const auto trace = load_trace(read_text(fixture_path("k5_n200/trace.csv")));
  TraceBackend backend(pool, trace.table);
  const auto config = study_config(500, {1, 0, 0}, 42, 200);
  const auto agg = run_study(config, pool, backend, trace.dataset,
                             exact_accuracies(pool, trace.table, trace.dataset));
  // Oracle checks that must hold before the text is trusted as a golden.
  CHECK(agg.arms[0].selection_frequency >= 0.90);
  CHECK(agg.mean_pulls_total == 500.0);
  CHECK(agg.mean_savings.eval == doctest::Approx(0.5));
  CHECK(agg.representative.config.seed == 42);
  CHECK(matches_golden("k5_seed42_report.json", serialize_report(agg)));
}
