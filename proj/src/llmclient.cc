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


#include "compx/llmclient.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

#include "compx/error.h"
#include "httplib.h"
#include "text_util.h"

namespace compx::llm {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

ChatConfig ChatConfig::from_env() {
  ChatConfig c;
  c.api_key = env_or("COMPX_API_KEY", "");
  c.base_url = env_or("COMPX_BASE_URL", c.base_url);
  c.model = env_or("COMPX_MODEL", c.model);
  return c;
}

void ChatConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error(ErrorCode::kOutOfRange, "temperature must be in [0, 2]");
  }
  if (max_retries < 0) throw Error(ErrorCode::kOutOfRange, "max_retries must be >= 0");
  if (!(timeout_s > 0.0)) throw Error(ErrorCode::kOutOfRange, "timeout must be positive");
}

ScriptedTransport::ScriptedTransport(std::vector<std::string> replies)
    : replies_(replies.begin(), replies.end()) {}

std::string ScriptedTransport::complete(const std::vector<prompts::PromptMessage>& messages,
                                        const ChatConfig&) {
  std::lock_guard<std::mutex> lock(mu_);
  requests_.push_back(messages);
  if (replies_.empty()) throw Error(ErrorCode::kScriptExhausted, "no scripted reply left");
  std::string r = std::move(replies_.front());
  replies_.pop_front();
  return r;
}

size_t ScriptedTransport::remaining() const {
  std::lock_guard<std::mutex> lock(mu_);
  return replies_.size();
}

std::vector<std::vector<prompts::PromptMessage>> ScriptedTransport::requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return requests_;
}

LiveTransport::LiveTransport()
    : LiveTransport([](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
      }) {}

LiveTransport::LiveTransport(Sleeper sleeper) : sleep_(std::move(sleeper)) {}

nlohmann::json request_body(const std::vector<prompts::PromptMessage>& messages,
                            const ChatConfig& config) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", std::string(prompts::role_name(m.role))}, {"content", m.content}});
  }
  return {{"model", config.model}, {"messages", msgs}, {"temperature", config.temperature}};
}

std::string LiveTransport::complete(const std::vector<prompts::PromptMessage>& messages,
                                    const ChatConfig& config) {
  if (config.api_key.empty()) throw Error(ErrorCode::kAuthMissing, "COMPX_API_KEY is not set");
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config.base_url, m, url_re)) {
    throw Error(ErrorCode::kHttpError, "bad base_url: " + config.base_url);
  }
  std::string path = m[2].str();
  while (!path.empty() && path.back() == '/') path.pop_back();
  path += "/chat/completions";

  httplib::Client client(m[1].str());
  const auto secs = static_cast<time_t>(config.timeout_s);
  const auto usecs = static_cast<time_t>((config.timeout_s - secs) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  const httplib::Headers headers{{"Authorization", "Bearer " + config.api_key}};
  const std::string body = request_body(messages, config).dump();

  std::string last_failure;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) sleep_(config.backoff_base_s * std::ldexp(1.0, attempt - 1));
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      const auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::kHttpError, "response is not JSON");
      const auto ptr = nlohmann::json::json_pointer("/choices/0/message/content");
      if (!j.contains(ptr) || !j[ptr].is_string()) return "";
      return j[ptr].get<std::string>();
    }
    last_failure = "status " + std::to_string(res->status);
    if (!retryable(res->status)) {
      throw Error(ErrorCode::kHttpError, last_failure + ": " + res->body.substr(0, 200));
    }
  }
  throw Error(ErrorCode::kHttpError,
              last_failure + " after " + std::to_string(config.max_retries + 1) + " attempts");
}

std::string chat_complete(const std::vector<prompts::PromptMessage>& messages,
                          const ChatConfig& config, Transport& transport) {
  if (messages.empty()) throw Error(ErrorCode::kInvariantViolation, "no messages");
  config.validate();
  std::string reply = transport.complete(messages, config);
  if (text::trim(reply).empty()) throw Error(ErrorCode::kEmptyCompletion, "empty completion");
  return reply;
}

}  // namespace compx::llm
