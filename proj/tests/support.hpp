#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "zoosel/canonical_json.hpp"
#include "zoosel/core.hpp"
#include "zoosel/eval_backend.hpp"

namespace zoosel::testing {

inline std::filesystem::path source_dir() { return ZOOSEL_SOURCE_DIR; }
inline std::filesystem::path fixture_path(const std::string& rel) { return source_dir() / "fixtures" / rel; }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// Compares against tests/golden/<name>; ZOOSEL_UPDATE_GOLDENS=1 rewrites it.
inline bool matches_golden(const std::string& name, const std::string& actual) {
  const auto path = source_dir() / "tests" / "golden" / name;
  if (const char* u = std::getenv("ZOOSEL_UPDATE_GOLDENS"); u && std::string(u) == "1") {
    write_text(path, actual);
    return true;
  }
  return std::filesystem::exists(path) && read_text(path) == actual;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("zoosel-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline ModelCandidate candidate(std::string id, double bench, double size, double complexity) {
  return {std::move(id), bench, size, complexity, ""};
}

// An httplib server on an ephemeral loopback port, stopped on destruction.
class LocalServer {
 public:
  explicit LocalServer(const std::function<void(httplib::Server&)>& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

// Stand-in for a remote evaluator: serves the protocol from a trace table.
class FakeEvaluator {
 public:
  FakeEvaluator(const ModelPool& pool, const TraceTable& table)
      : server_([&](httplib::Server& s) {
          s.Get("/models", [&pool](const httplib::Request&, httplib::Response& res) {
            res.set_content(save_pool(pool), "application/json");
          });
          s.Post("/evaluate", [this, &table](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            const auto body = Json::parse(req.body);
            const auto model = body.at("model_id").get<std::string>();
            Json results = Json::array();
            for (const auto& s : body.at("sample_ids")) {
              const auto sid = s.get<std::string>();
              if (!table.contains(model, sid)) {
                res.status = 404;
                res.set_content(Json({{"error", "unknown pair " + model + "/" + sid}}).dump(),
                                "application/json");
                return;
              }
              results.push_back({{"sample_id", sid}, {"correct", table.at(model, sid) ? 1 : 0}});
            }
            res.set_content(Json({{"results", results}}).dump(), "application/json");
          });
        }) {}

  std::string url() const { return server_.url(); }
  std::size_t requests() const { return requests_.load(); }

 private:
  std::atomic<std::size_t> requests_{0};
  LocalServer server_;
};

}  // namespace zoosel::testing
