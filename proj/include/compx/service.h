// Copyright 2026 The Compx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef COMPX_SERVICE_H_
#define COMPX_SERVICE_H_

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "compx/agent.h"
#include "json.hpp"

namespace httplib {
class Server;
}

// HTTP API over agent sessions. Sessions run on their own threads; clients
// poll for state and trace.
//
//   POST /sessions                        201 {id}
//   GET  /sessions/{id}                   200 {id, state, ...}
//   GET  /sessions/{id}/trace             200 trace of the latest segment + "segments"
//   POST /sessions/{id}/message           200 {id, segment, state, constraints}
//   GET  /sessions/{id}/artifacts/{kind}  original | recon | mask | stream | plan
//   GET  /ui/...                          static files, when configured
//
// Failures carry {"status", "code", "message"}.
namespace compx::service {

struct ServiceConfig {
  // Session directories go under <work_dir>/<id>. Empty: a fresh directory
  // under the system temp path.
  std::filesystem::path work_dir;
  // Searched for relative server-side image paths.
  std::vector<std::filesystem::path> image_dirs;
  std::optional<std::filesystem::path> ui_dir;
  // Template for every session: chat config, live transport, mask source.
  agent::Deps base;
  // Upper bound for POST /message waiting on the new plan.
  double plan_wait_s = 30.0;
};

struct ApiError {
  int status = 500;
  std::string code;
  std::string message;

  nlohmann::ordered_json to_json() const;
};

class Service {
 public:
  explicit Service(ServiceConfig config);
  // Stops listening and joins every session thread.
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Registers the routes on an existing server.
  void mount(httplib::Server& server);

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port; throws IoError when binding fails.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void listen(const std::string& host, int port);
  void stop();

  const std::filesystem::path& work_dir() const { return config_.work_dir; }
  // Blocks until the session is terminal or the timeout passes.
  bool wait_terminal(const std::string& id, double timeout_s);

 private:
  struct Entry;
  struct Request {
    std::string instruction;
    std::optional<std::string> image;
    std::string planner;
    std::string proposer;
    std::string transport;
    std::optional<std::pair<std::string, std::string>> upload;  // filename, bytes
  };

  nlohmann::ordered_json create(const Request& req);
  std::shared_ptr<Entry> find(const std::string& id);
  void launch(const std::shared_ptr<Entry>& e, std::string instruction, bool followup);
  nlohmann::ordered_json summary(Entry& e);
  nlohmann::ordered_json trace(Entry& e);
  nlohmann::ordered_json post_message(Entry& e, const std::string& instruction);
  std::pair<std::string, std::string> artifact(Entry& e, const std::string& kind);

  ServiceConfig config_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  uint64_t counter_ = 0;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
};

}  // namespace compx::service

#endif  // COMPX_SERVICE_H_
