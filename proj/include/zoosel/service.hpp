#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "zoosel/reasoning.hpp"
#include "zoosel/reporting.hpp"

namespace httplib {
class Server;
}

namespace zoosel {

// HTTP API behind the web front end:
//   PUT  /api/fixtures/{name}            register a pool or trace file
//   POST /api/reason                     propose weights for a use case
//   POST /api/experiments                launch a study, 202 {id}
//   GET  /api/experiments/{id}           status, progress, partial leaderboard
//   GET  /api/experiments/{id}/report    canonical aggregate report (409 until done)
class Service {
 public:
  struct Options {
    std::optional<std::filesystem::path> persist_dir;  // finished records land here
    std::size_t study_threads = 1;
    LlmClient* llm = nullptr;  // not owned; nullptr means offline only
    ReasoningOptions reasoning;
  };

  explicit Service(Options options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void mount(httplib::Server& server);

  // Blocks until every launched experiment has finished.
  void wait_idle();

 private:
  struct Fixture;
  struct Experiment;

  std::shared_ptr<const Fixture> fixture(const std::string& name) const;
  std::shared_ptr<Experiment> experiment(const std::string& id) const;
  std::string launch(const Json& body);
  Json record_json(const Experiment& e) const;

  Options options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Fixture>> fixtures_;
  std::map<std::string, std::shared_ptr<Experiment>> experiments_;
  std::vector<std::jthread> workers_;
  std::uint64_t next_id_ = 1;
};

}  // namespace zoosel
