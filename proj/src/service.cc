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


#include "compx/service.h"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>

#include "compx/error.h"
#include "httplib.h"
#include "text_util.h"

namespace compx::service {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using agent::State;

struct HttpFailure {
  ApiError error;
};

[[noreturn]] void fail(int status, std::string code, std::string message) {
  throw HttpFailure{ApiError{status, std::move(code), std::move(message)}};
}

std::string now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(404, "ArtifactNotFound", p.filename().string() + " is missing");
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

std::string image_content_type(const std::filesystem::path& p) {
  const std::string ext = text::lower(p.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  if (ext == ".pgm") return "image/x-portable-graymap";
  return "application/octet-stream";
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) { send_json(res, e.status, e.to_json()); }

std::string default_status_code(int status) {
  switch (status) {
    case 400: return "BadRequest";
    case 404: return "NotFound";
    case 405: return "MethodNotAllowed";
    case 413: return "PayloadTooLarge";
    default: return status >= 500 ? "Internal" : "HttpError";
  }
}

}  // namespace

ordered_json ApiError::to_json() const {
  return ordered_json{{"status", status}, {"code", code}, {"message", message}};
}

struct Service::Entry {
  std::string id;
  std::string created_at;
  std::filesystem::path dir;
  std::filesystem::path image_path;
  std::string planner;
  std::string proposer;
  std::string transport;

  std::mutex mu;
  std::condition_variable cv;
  State state = State::kPlanning;
  std::optional<State> pending_terminal;
  bool running = false;
  std::vector<std::string> states;
  std::vector<agent::SessionTrace> segments;

  // Touched only by the worker thread while running.
  std::unique_ptr<agent::Session> session;
  std::thread worker;

  void observe(State s) {
    state = s;
    const std::string name(agent::state_name(s));
    if (states.empty() || states.back() != name) states.push_back(name);
  }
};

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.work_dir.empty()) {
    std::random_device rd;
    config_.work_dir = std::filesystem::temp_directory_path() /
                       ("compx-sessions-" + std::to_string(rd() % 1000000));
  }
  std::filesystem::create_directories(config_.work_dir);
  if (config_.image_dirs.empty()) config_.image_dirs.push_back(agent::default_image_dir());
}

Service::~Service() {
  stop();
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, e] : sessions_) entries.push_back(e);
  }
  for (auto& e : entries) {
    if (e->worker.joinable()) e->worker.join();
  }
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(404, "UnknownSession", "no session '" + id + "'");
  return it->second;
}

ordered_json Service::create(const Request& req) {
  if (text::trim(req.instruction).empty()) fail(400, "MissingField", "instruction is required");

  std::optional<agent::Fixture> fixture;
  if (!req.transport.empty() && req.transport != "live") {
    const std::string prefix = "fixture:";
    if (req.transport.rfind(prefix, 0) != 0) {
      fail(422, "InvalidTransport", "transport must be 'live' or 'fixture:<name>'");
    }
    try {
      fixture = agent::load_fixture(req.transport.substr(prefix.size()));
    } catch (const Error& e) {
      fail(404, "FixtureNotFound", e.detail());
    }
  }

  const std::string planner_name =
      req.planner.empty() ? (fixture ? "llm_with_fallback" : "rules") : req.planner;
  const auto planner = agent::parse_planner_mode(planner_name);
  if (!planner) fail(422, "InvalidPlannerMode", "unknown planner '" + planner_name + "'");
  const std::string proposer_name =
      req.proposer.empty() ? (fixture ? "llm" : "bisection") : req.proposer;
  const auto proposer = agent::parse_proposer(proposer_name);
  if (!proposer) fail(422, "InvalidProposer", "unknown proposer '" + proposer_name + "'");

  std::filesystem::path image;
  if (!req.upload && req.image) {
    std::filesystem::path p = *req.image;
    if (!std::filesystem::is_regular_file(p) && p.is_relative()) {
      for (const auto& d : config_.image_dirs) {
        if (std::filesystem::is_regular_file(d / p)) {
          p = d / p;
          break;
        }
      }
    }
    if (!std::filesystem::is_regular_file(p)) fail(404, "ImageNotFound", *req.image);
    image = p;
  } else if (!req.upload) {
    if (!fixture) fail(400, "MissingField", "image is required");
    image = fixture->image;
  }

  auto e = std::make_shared<Entry>();
  {
    std::lock_guard lock(mu_);
    std::random_device rd;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%06llu-%08x", static_cast<unsigned long long>(++counter_),
                  static_cast<unsigned>(rd()));
    e->id = buf;
  }
  e->created_at = now_iso8601();
  e->dir = config_.work_dir / e->id;
  std::filesystem::create_directories(e->dir);
  if (req.upload) {
    std::string ext = text::lower(std::filesystem::path(req.upload->first).extension().string());
    image = e->dir / ("original" + (ext.empty() ? std::string(".png") : ext));
    std::ofstream(image, std::ios::binary) << req.upload->second;
    try {
      imaging::load_image(image);
    } catch (const Error& err) {
      std::filesystem::remove_all(e->dir);
      fail(400, std::string(err.name()), "uploaded image: " + err.detail());
    }
  }
  e->image_path = image;
  e->planner = planner_name;
  e->proposer = proposer_name;
  e->transport = req.transport.empty() ? "live" : req.transport;

  agent::Deps deps = config_.base;
  deps.planner = *planner;
  deps.proposer = *proposer;
  deps.image_path = image;
  deps.image_dirs = config_.image_dirs;
  deps.session_dir = e->dir;
  if (fixture) {
    deps.transport = std::make_shared<llm::ScriptedTransport>(fixture->replies);
    deps.executor = std::make_shared<agent::ReplayExecutor>(fixture->executions, true);
  }
  Entry* raw = e.get();
  deps.on_state = [raw](State s) {
    std::lock_guard lock(raw->mu);
    if (agent::is_terminal(s)) {
      raw->pending_terminal = s;
    } else {
      raw->observe(s);
    }
    raw->cv.notify_all();
  };
  deps.on_progress = [raw](const agent::SessionTrace& t) {
    std::lock_guard lock(raw->mu);
    raw->segments.back() = t;
    raw->cv.notify_all();
  };
  e->session = std::make_unique<agent::Session>(std::move(deps));

  {
    std::lock_guard lock(mu_);
    sessions_[e->id] = e;
  }
  launch(e, req.instruction, false);
  return ordered_json{{"id", e->id}, {"state", "planning"}};
}

void Service::launch(const std::shared_ptr<Entry>& e, std::string instruction, bool followup) {
  if (e->worker.joinable()) e->worker.join();
  {
    std::lock_guard lock(e->mu);
    e->running = true;
    e->pending_terminal.reset();
    e->observe(State::kPlanning);
    agent::SessionTrace t;
    t.request = instruction;
    e->segments.push_back(std::move(t));
  }
  Entry* raw = e.get();
  e->worker = std::thread([raw, instruction = std::move(instruction), followup] {
    const agent::SessionTrace& final =
        followup ? raw->session->follow_up(instruction) : raw->session->run(instruction);
    std::lock_guard lock(raw->mu);
    raw->segments.back() = final;
    raw->observe(raw->pending_terminal.value_or(final.error ? State::kFailed : State::kDone));
    raw->running = false;
    raw->cv.notify_all();
  });
}

bool Service::wait_terminal(const std::string& id, double timeout_s) {
  const auto e = find(id);
  std::unique_lock lock(e->mu);
  return e->cv.wait_for(lock, std::chrono::duration<double>(timeout_s),
                        [&] { return !e->running; });
}

ordered_json Service::summary(Entry& e) {
  std::lock_guard lock(e.mu);
  ordered_json j;
  j["id"] = e.id;
  j["state"] = std::string(agent::state_name(e.state));
  j["terminal"] = !e.running && agent::is_terminal(e.state);
  j["created_at"] = e.created_at;
  j["planner"] = e.planner;
  j["proposer"] = e.proposer;
  j["transport"] = e.transport;
  j["segments"] = e.segments.size();
  j["iterations"] = e.segments.empty() ? 0 : e.segments.back().iterations.size();
  j["states"] = e.states;
  return j;
}

ordered_json Service::trace(Entry& e) {
  std::lock_guard lock(e.mu);
  ordered_json j;
  j["id"] = e.id;
  j["state"] = std::string(agent::state_name(e.state));
  const ordered_json latest = agent::to_json(e.segments.back());
  for (const auto& [k, v] : latest.items()) j[k] = v;
  ordered_json segs = ordered_json::array();
  for (const auto& s : e.segments) segs.push_back(agent::to_json(s));
  j["segments"] = segs;
  return j;
}

ordered_json Service::post_message(Entry& e, const std::string& instruction) {
  if (text::trim(instruction).empty()) fail(400, "MissingField", "instruction is required");
  {
    std::lock_guard lock(e.mu);
    if (e.running || !agent::is_terminal(e.state)) {
      fail(409, "SessionBusy", "session is " + std::string(agent::state_name(e.state)));
    }
  }
  std::shared_ptr<Entry> keep = find(e.id);
  launch(keep, instruction, true);
  std::unique_lock lock(e.mu);
  const size_t segment = e.segments.size() - 1;
  e.cv.wait_for(lock, std::chrono::duration<double>(config_.plan_wait_s),
                [&] { return e.segments.back().planned || !e.running; });
  const agent::SessionTrace& t = e.segments.back();
  ordered_json j;
  j["id"] = e.id;
  j["segment"] = segment;
  j["state"] = std::string(agent::state_name(e.state));
  j["constraints"] = t.planned ? agent::to_json(t.constraints) : ordered_json(nullptr);
  j["plan"] = t.planned ? plan::to_json(t.plan) : ordered_json(nullptr);
  if (t.error) j["error"] = {{"stage", t.error->stage}, {"code", t.error->code}};
  return j;
}

std::pair<std::string, std::string> Service::artifact(Entry& e, const std::string& kind) {
  std::unique_lock lock(e.mu);
  const bool terminal = !e.running && agent::is_terminal(e.state);
  auto unavailable = [&](const std::string& what) -> std::pair<std::string, std::string> {
    if (terminal) fail(404, "ArtifactNotFound", "session has no " + what);
    fail(409, "NotReadyYet", what + " is not available yet");
  };
  if (kind == "original") {
    const auto path = e.image_path;
    lock.unlock();
    return {read_file(path), image_content_type(path)};
  }
  if (kind == "plan") {
    for (auto it = e.segments.rbegin(); it != e.segments.rend(); ++it) {
      if (it->planned) return {plan::to_json(it->plan).dump(2), "application/json"};
    }
    return unavailable("plan");
  }
  if (kind == "mask") {
    const auto path = e.dir / "mask.png";
    if (!std::filesystem::exists(path)) return unavailable("mask");
    lock.unlock();
    return {read_file(path), "image/png"};
  }
  if (kind == "recon" || kind == "stream") {
    for (size_t k = e.segments.size(); k-- > 0;) {
      const auto& s = e.segments[k];
      if (s.iterations.empty()) continue;
      const int index = s.chosen_iteration.value_or(s.iterations.back().index);
      const auto path = e.session->segment_dir(k) / ("iter_" + std::to_string(index)) /
                        (kind == "recon" ? "recon.png" : "stream.ssbx");
      lock.unlock();
      return {read_file(path), kind == "recon" ? "image/png" : "application/octet-stream"};
    }
    return unavailable(kind);
  }
  fail(404, "UnknownArtifact", "artifact kind must be original, recon, mask, stream or plan");
}

void Service::mount(httplib::Server& server) {
  auto guarded = [](auto body) {
    return [body](const httplib::Request& req, httplib::Response& res) {
      try {
        body(req, res);
      } catch (const HttpFailure& f) {
        send_error(res, f.error);
      } catch (const Error& e) {
        send_error(res, ApiError{500, std::string(e.name()), e.detail()});
      }
    };
  };

  server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Request r;
    if (req.is_multipart_form_data()) {
      auto field = [&](const char* name) {
        return req.has_file(name) ? req.get_file_value(name).content : std::string();
      };
      r.instruction = field("instruction");
      r.planner = field("planner");
      r.proposer = field("proposer");
      r.transport = field("transport");
      if (req.has_file("image")) {
        const auto f = req.get_file_value("image");
        if (f.filename.empty()) {
          r.image = f.content;
        } else {
          r.upload = std::make_pair(f.filename, f.content);
        }
      }
    } else {
      const json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        fail(400, "InvalidJson", "body must be a JSON object");
      }
      auto str = [&](const char* key) {
        const auto it = body.find(key);
        if (it == body.end() || it->is_null()) return std::string();
        if (!it->is_string()) fail(400, "InvalidField", std::string(key) + " must be a string");
        return it->get<std::string>();
      };
      r.instruction = str("instruction");
      r.planner = str("planner");
      r.proposer = str("proposer");
      r.transport = str("transport");
      if (const std::string img = str("image"); !img.empty()) r.image = img;
    }
    send_json(res, 201, create(r));
  }));

  server.Get(R"(/sessions/([^/]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, summary(*find(req.matches[1])));
             }));

  server.Get(R"(/sessions/([^/]+)/trace)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, trace(*find(req.matches[1])));
             }));

  server.Post(R"(/sessions/([^/]+)/message)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto e = find(req.matches[1]);
                const json body = json::parse(req.body, nullptr, false);
                if (body.is_discarded() || !body.is_object()) {
                  fail(400, "InvalidJson", "body must be a JSON object");
                }
                const auto it = body.find("instruction");
                if (it == body.end() || !it->is_string()) {
                  fail(400, "MissingField", "instruction is required");
                }
                send_json(res, 200, post_message(*e, it->get<std::string>()));
              }));

  server.Get(R"(/sessions/([^/]+)/artifacts/([^/]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto [body, type] = artifact(*find(req.matches[1]), req.matches[2]);
               res.status = 200;
               res.set_content(body, type);
             }));

  if (config_.ui_dir && std::filesystem::is_directory(*config_.ui_dir)) {
    server.set_mount_point("/ui", config_.ui_dir->string());
  }

  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, ApiError{res.status, default_status_code(res.status),
                               httplib::status_message(res.status)});
    }
  });
  server.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unknown error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        send_error(res, ApiError{500, "Internal", what});
      });
}

int Service::start(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIoError, "cannot bind " + host);
  } else if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::kIoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  listener_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::listen(const std::string& host, int port) {
  start(host, port);
  if (listener_.joinable()) listener_.join();
}

void Service::stop() {
  if (server_) server_->stop();
  if (listener_.joinable() && listener_.get_id() != std::this_thread::get_id()) listener_.join();
}

}  // namespace compx::service
