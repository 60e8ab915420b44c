#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "zoosel/error.hpp"

using namespace zoosel;
using namespace zoosel::testing;

namespace {

ModelPool small_pool(std::size_t k) {
  std::vector<ModelCandidate> c;
  for (std::size_t i = 0; i < k; ++i)
    c.push_back(candidate("m" + std::to_string(i + 1), 0.5, 10.0 * (i + 1), 100.0 * (i + 1)));
  return ModelPool(std::move(c));
}

}  // namespace

TEST_CASE("trace lookup") {
  TraceTable t;
  CHECK(t.insert("m1", "s7", true));
  CHECK(t.insert("m1", "s8", false));
  const auto pool = small_pool(1);
  TraceBackend b(pool, t);
  CHECK(b.evaluate(0, "s7").correct);
  CHECK_FALSE(b.evaluate(0, "s8").correct);
  CHECK(b.evaluate(0, "s7").cost_mmac == 100.0);
}

TEST_CASE("trace miss aborts instead of imputing") {
  TraceTable t;
  t.insert("m1", "s1", true);
  const auto pool = small_pool(1);
  TraceBackend b(pool, t);
  try {
    b.evaluate(0, "s2");
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(std::string(e.what()).find("s2") != std::string::npos);
  }
}

TEST_CASE("trace backend needs every pool model") {
  TraceTable t;
  t.insert("m1", "s1", true);
  const auto pool = small_pool(2);
  CHECK_THROWS_AS(TraceBackend(pool, t), Error);
}

TEST_CASE("load_trace: 3 rows, 1 model, 3 samples") {
  const auto lt = load_trace("model_id,sample_id,correct\nm1,s1,1\nm1,s2,0\nm1,s3,1\n");
  CHECK(lt.dataset.size() == 3);
  CHECK(lt.table.entries() == 3);
  CHECK(lt.dataset.ids() == std::vector<std::string>{"s1", "s2", "s3"});
}

TEST_CASE("load_trace: contradictory rows") {
  CHECK_THROWS_AS(load_trace("model_id,sample_id,correct\nm1,s1,1\nm1,s1,0\n"), ValidationError);
  // Repeating the same bit is harmless.
  CHECK(load_trace("model_id,sample_id,correct\nm1,s1,1\nm1,s1,1\n").table.entries() == 1);
}

TEST_CASE("load_trace: bad inputs") {
  CHECK_THROWS_AS(load_trace("model,sample,correct\nm1,s1,1\n"), Error);
  CHECK_THROWS_AS(load_trace("model_id,sample_id,correct\nm1,s1,2\n"), Error);
  CHECK_THROWS_AS(load_trace("model_id,sample_id,correct\nm1,s1\n"), Error);
}

TEST_CASE("bundled K=71 trace") {
  const auto lt = load_trace(read_text(fixture_path("k71_n200/trace.csv")));
  const auto pool = load_pool(read_text(fixture_path("k71_n200/pool.json")));
  CHECK(lt.table.entries() == 14200);
  CHECK(lt.dataset.size() == 200);
  CHECK(pool.size() == 71);
  CHECK(lt.table.complete_over(pool, lt.dataset));
}

TEST_CASE("property: trace save/load is identity up to row order") {
  const auto text = read_text(fixture_path("k5_n200/trace.csv"));
  CHECK(save_trace(load_trace(text).table) == text);

  std::vector<std::string> rows;
  std::string line;
  std::istringstream in(text);
  std::getline(in, line);
  while (std::getline(in, line)) rows.push_back(line);
  std::mt19937_64 gen(3);
  std::shuffle(rows.begin(), rows.end(), gen);
  std::string shuffled = "model_id,sample_id,correct\r\n";
  for (const auto& r : rows) shuffled += r + "\r\n";
  CHECK(save_trace(load_trace(shuffled).table) == text);
}

TEST_CASE("synthetic p = 1 always correct, p = 0 never") {
  const auto pool = small_pool(2);
  SyntheticBackend b(pool, {1.0, 0.0}, 99);
  const auto ds = synthetic_dataset(500);
  for (const auto& s : ds.ids()) {
    CHECK(b.evaluate(0, s).correct);
    CHECK_FALSE(b.evaluate(1, s).correct);
  }
}

TEST_CASE("synthetic p = 0.5 over 10000 samples") {
  const auto pool = small_pool(1);
  SyntheticBackend b(pool, {0.5}, 1234);
  const auto ds = synthetic_dataset(10000);
  int hits = 0;
  for (const auto& s : ds.ids()) hits += b.evaluate(0, s).correct;
  CHECK(std::abs(hits / 10000.0 - 0.5) <= 0.02);
}

TEST_CASE("property: synthetic accuracy converges to p") {
  const std::vector<double> p{0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95};
  const auto pool = small_pool(p.size());
  const std::size_t n = 4000;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SyntheticBackend b(pool, p, seed);
    const auto ds = synthetic_dataset(n);
    for (ArmIndex i = 0; i < p.size(); ++i) {
      int hits = 0;
      for (const auto& s : ds.ids()) hits += b.evaluate(i, s).correct;
      CHECK(std::abs(hits / double(n) - p[i]) <= 3 * std::sqrt(p[i] * (1 - p[i]) / n));
    }
  }
}

TEST_CASE("property: evaluate is idempotent and order independent") {
  const auto pool = small_pool(3);
  SyntheticBackend b(pool, {0.3, 0.5, 0.7}, 5);
  const auto ds = synthetic_dataset(50);
  std::vector<bool> first;
  for (ArmIndex i = 0; i < 3; ++i)
    for (const auto& s : ds.ids()) first.push_back(b.evaluate(i, s).correct);
  std::size_t k = first.size();
  for (ArmIndex i = 3; i-- > 0;)
    for (std::size_t j = ds.size(); j-- > 0;) CHECK(b.evaluate(i, ds[j]).correct == first[--k]);

  const auto trace = load_trace("model_id,sample_id,correct\nm1,a,1\nm1,b,0\n");
  const auto p1 = small_pool(1);
  TraceBackend tb(p1, trace.table);
  for (int r = 0; r < 5; ++r) {
    CHECK(tb.evaluate(0, "a").correct);
    CHECK_FALSE(tb.evaluate(0, "b").correct);
  }
}

TEST_CASE("synthetic table K=2 N=3") {
  const auto pool = small_pool(2);
  const auto ds = synthetic_dataset(3);
  const std::vector<double> p{1.0, 0.0};
  const auto t = synthetic_table(pool, p, ds, 8);
  CHECK(t.entries() == 6);
  for (const auto& s : ds.ids()) {
    CHECK(t.at("m1", s));
    CHECK_FALSE(t.at("m2", s));
  }
}

TEST_CASE("generated pools stay within the size and complexity bounds") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto fx = generate_synthetic({{}, 20, seed}, 40);
    CHECK(fx.pool.size() == 40);
    CHECK(fx.accuracies.size() == 40);
    for (const auto& m : fx.pool) {
      CHECK(m.size_mb >= kMinSizeMb);
      CHECK(m.size_mb <= kMaxSizeMb);
      CHECK(m.complexity_mmac >= kMinComplexityMmac);
      CHECK(m.complexity_mmac <= kMaxComplexityMmac);
    }
    for (double p : fx.accuracies) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate_synthetic({{}, 30, 17}, 9);
  const auto b = generate_synthetic({{}, 30, 17}, 9);
  const auto c = generate_synthetic({{}, 30, 18}, 9);
  CHECK(save_pool(a.pool) == save_pool(b.pool));
  CHECK(save_trace(a.table) == save_trace(b.table));
  CHECK(save_trace(a.table) != save_trace(c.table));
  CHECK_THROWS_AS(generate_synthetic({{0.5, 0.5}, 30, 1}, 3), ValidationError);
}

TEST_CASE("bundled fixtures match the generator") {
  const auto k71 = generate_synthetic({{}, 200, 71}, 71);
  CHECK(save_pool(k71.pool) == read_text(fixture_path("k71_n200/pool.json")));
  CHECK(save_trace(k71.table) == read_text(fixture_path("k71_n200/trace.csv")));
  const auto k5 = generate_synthetic({{0.9, 0.7, 0.5, 0.3, 0.1}, 200, 5}, 5);
  CHECK(save_pool(k5.pool) == read_text(fixture_path("k5_n200/pool.json")));
  CHECK(save_trace(k5.table) == read_text(fixture_path("k5_n200/trace.csv")));
}

TEST_CASE("dataset files") {
  const auto ds = load_dataset("s1\r\ns2\n\ns3\n");
  CHECK(ds.size() == 3);
  CHECK(ds.contains("s2"));
  CHECK_THROWS_AS(load_dataset("a\na\n"), ValidationError);
  CHECK_THROWS_AS(load_dataset(""), ValidationError);
}

TEST_CASE("remote protocol: models and per-pull evaluation") {
  const auto fx = generate_synthetic({{0.9, 0.5, 0.1}, 40, 21}, 3);
  FakeEvaluator server(fx.pool, fx.table);

  const auto pool = fetch_remote_pool(server.url());
  CHECK(pool == fx.pool);

  RemoteBackend remote(server.url(), pool);
  for (ArmIndex i = 0; i < 3; ++i)
    for (const auto& s : fx.dataset.ids()) {
      const auto r = remote.evaluate(i, s);
      CHECK(r.correct == fx.table.at(pool[i].id, s));
      CHECK(r.sample_id == s);
      CHECK(r.cost_mmac == pool[i].complexity_mmac);
    }
  CHECK(server.requests() == 3 * 40);
}

TEST_CASE("remote protocol: batched requests") {
  const auto fx = generate_synthetic({{0.9, 0.5}, 25, 22}, 2);
  FakeEvaluator server(fx.pool, fx.table);
  RemoteBackend remote(server.url(), fx.pool);
  const auto results = remote.evaluate_batch(1, fx.dataset.ids());
  CHECK(server.requests() == 1);
  REQUIRE(results.size() == 25);
  for (std::size_t j = 0; j < 25; ++j) {
    CHECK(results[j].sample_id == fx.dataset[j]);
    CHECK(results[j].correct == fx.table.at(fx.pool[1].id, fx.dataset[j]));
  }
}

TEST_CASE("remote protocol: unknown sample surfaces the server error") {
  const auto fx = generate_synthetic({{0.5}, 5, 23}, 1);
  FakeEvaluator server(fx.pool, fx.table);
  RemoteBackend remote(server.url(), fx.pool);
  try {
    remote.evaluate(0, "nope");
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(std::string(e.what()).find("unknown pair") != std::string::npos);
  }
}

TEST_CASE("remote protocol: unreachable endpoint") {
  const auto pool = small_pool(1);
  int port;
  { LocalServer probe([](httplib::Server&) {}); port = probe.port(); }
  RemoteBackend remote("http://127.0.0.1:" + std::to_string(port), pool);
  CHECK_THROWS_AS(remote.evaluate(0, "s1"), BackendError);
  CHECK_THROWS_AS(fetch_remote_pool("http://127.0.0.1:" + std::to_string(port)), Error);
}

TEST_CASE("remote protocol: request body shape") {
  const auto pool = small_pool(1);
  Json seen;
  LocalServer server([&](httplib::Server& s) {
    s.Post("/evaluate", [&](const httplib::Request& req, httplib::Response& res) {
      seen = Json::parse(req.body);
      CHECK(req.get_header_value("Content-Type") == "application/json");
      res.set_content(R"({"results":[{"sample_id":"x","correct":1}]})", "application/json");
    });
  });
  RemoteBackend remote(server.url(), pool);
  CHECK(remote.evaluate(0, "x").correct);
  CHECK(seen == Json({{"model_id", "m1"}, {"sample_ids", {"x"}}}));
}

TEST_CASE("remote protocol: malformed response") {
  const auto pool = small_pool(1);
  LocalServer server([](httplib::Server& s) {
    s.Post("/evaluate", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"results":[{"sample_id":"other","correct":1}]})", "application/json");
    });
  });
  RemoteBackend remote(server.url(), pool);
  CHECK_THROWS_AS(remote.evaluate(0, "x"), BackendError);
}
