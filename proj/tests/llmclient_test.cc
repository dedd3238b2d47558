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

#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include "httplib.h"
#include "test_util.h"

namespace compx::llm {
namespace {

using prompts::PromptMessage;
using prompts::Role;

// Local OpenAI-style endpoint. Replies with the roles and contents it
// received, after failing the first `failures` requests with `fail_status`.
class EchoServer {
 public:
  EchoServer(int failures = 0, int fail_status = 503)
      : failures_(failures), fail_status_(fail_status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      ++hits_;
      auth_ = req.get_header_value("Authorization");
      if (failures_ > 0) {
        --failures_;
        res.status = fail_status_;
        res.set_content("busy", "text/plain");
        return;
      }
      last_body_ = nlohmann::json::parse(req.body);
      std::string echo;
      for (const auto& m : last_body_["messages"]) {
        echo += m["role"].get<std::string>() + ":" + m["content"].get<std::string>() + "|";
      }
      if (empty_reply_) echo.clear();
      nlohmann::json out = {{"choices", {{{"message", {{"role", "assistant"}, {"content", echo}}}}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~EchoServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int hits() const { return hits_; }
  const nlohmann::json& last_body() const { return last_body_; }
  const std::string& auth() const { return auth_; }
  void set_empty_reply() { empty_reply_ = true; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> failures_;
  int fail_status_;
  std::atomic<int> hits_{0};
  nlohmann::json last_body_;
  std::string auth_;
  bool empty_reply_ = false;
};

ChatConfig local_config(const EchoServer& s) {
  ChatConfig c;
  c.base_url = s.base_url();
  c.api_key = "test-key";
  c.timeout_s = 5;
  return c;
}

const std::vector<PromptMessage> kMessages = {
    {Role::kSystem, "plan carefully"}, {Role::kUser, "compress a.png"},
    {Role::kAssistant, "{}"}, {Role::kUser, "Expert feedback: fix it"}};

TEST(Scripted, SingleReply) {
  ScriptedTransport t({"hello"});
  EXPECT_EQ(chat_complete(kMessages, ChatConfig{}, t), "hello");
}

TEST(Scripted, FifoThenExhausted) {
  ScriptedTransport t({"a", "b"});
  EXPECT_EQ(chat_complete(kMessages, ChatConfig{}, t), "a");
  EXPECT_EQ(chat_complete(kMessages, ChatConfig{}, t), "b");
  EXPECT_COMPX_ERROR(chat_complete(kMessages, ChatConfig{}, t), ErrorCode::kScriptExhausted);
  EXPECT_EQ(t.requests().size(), 3u);
  EXPECT_EQ(t.remaining(), 0u);
}

TEST(Scripted, EmptyReplyIsEmptyCompletion) {
  ScriptedTransport t({"  \n"});
  EXPECT_COMPX_ERROR(chat_complete(kMessages, ChatConfig{}, t), ErrorCode::kEmptyCompletion);
}

TEST(Scripted, NoMessages) {
  ScriptedTransport t({"x"});
  EXPECT_COMPX_ERROR(chat_complete({}, ChatConfig{}, t), ErrorCode::kInvariantViolation);
  EXPECT_EQ(t.remaining(), 1u);
}

TEST(Scripted, ConcurrentConsumersGetDistinctReplies) {
  std::vector<std::string> replies;
  for (int i = 0; i < 200; ++i) replies.push_back(std::to_string(i));
  ScriptedTransport t(replies);
  std::vector<std::vector<std::string>> got(4);
  std::vector<std::thread> threads;
  for (int k = 0; k < 4; ++k) {
    threads.emplace_back([&, k] {
      for (int i = 0; i < 50; ++i) got[k].push_back(chat_complete(kMessages, ChatConfig{}, t));
    });
  }
  for (auto& th : threads) th.join();
  std::set<std::string> all;
  for (const auto& g : got) all.insert(g.begin(), g.end());
  EXPECT_EQ(all.size(), 200u);
}

TEST(Config, Validation) {
  ChatConfig c;
  EXPECT_NO_THROW(c.validate());
  c.temperature = 2.5;
  EXPECT_COMPX_ERROR(c.validate(), ErrorCode::kOutOfRange);
  c.temperature = 0.7;
  c.max_retries = -1;
  EXPECT_COMPX_ERROR(c.validate(), ErrorCode::kOutOfRange);
}

TEST(Config, FromEnv) {
  ::setenv("COMPX_API_KEY", "k1", 1);
  ::setenv("COMPX_BASE_URL", "http://example.invalid/v9", 1);
  ::unsetenv("COMPX_MODEL");
  const ChatConfig c = ChatConfig::from_env();
  EXPECT_EQ(c.api_key, "k1");
  EXPECT_EQ(c.base_url, "http://example.invalid/v9");
  EXPECT_EQ(c.model, "gpt-4o");
  EXPECT_DOUBLE_EQ(c.temperature, 0.7);
  ::unsetenv("COMPX_API_KEY");
  ::unsetenv("COMPX_BASE_URL");
}

TEST(RequestBody, Shape) {
  ChatConfig c;
  c.model = "m";
  const auto b = request_body(kMessages, c);
  EXPECT_EQ(b["model"], "m");
  EXPECT_DOUBLE_EQ(b["temperature"].get<double>(), 0.7);
  ASSERT_EQ(b["messages"].size(), 4u);
  EXPECT_EQ(b["messages"][0]["role"], "system");
  EXPECT_EQ(b["messages"][2]["role"], "assistant");
}

TEST(Live, EchoPreservesRolesAndOrder) {
  EchoServer server;
  LiveTransport t([](double) {});
  const std::string reply = chat_complete(kMessages, local_config(server), t);
  EXPECT_EQ(reply,
            "system:plan carefully|user:compress a.png|assistant:{}|user:Expert feedback: fix it|");
  EXPECT_EQ(server.auth(), "Bearer test-key");
  EXPECT_EQ(server.last_body()["model"], "gpt-4o");
  EXPECT_EQ(server.last_body()["messages"].size(), kMessages.size());
}

TEST(Live, TrailingSlashInBaseUrl) {
  EchoServer server;
  LiveTransport t([](double) {});
  ChatConfig c = local_config(server);
  c.base_url += "/";
  EXPECT_NO_THROW(chat_complete(kMessages, c, t));
}

TEST(Live, RetriesWithExponentialBackoff) {
  EchoServer server(2, 503);
  std::vector<double> delays;
  LiveTransport t([&](double s) { delays.push_back(s); });
  EXPECT_NO_THROW(chat_complete(kMessages, local_config(server), t));
  EXPECT_EQ(server.hits(), 3);
  EXPECT_EQ(delays, (std::vector<double>{1.0, 2.0}));
}

TEST(Live, GivesUpAfterMaxRetries) {
  EchoServer server(10, 429);
  std::vector<double> delays;
  LiveTransport t([&](double s) { delays.push_back(s); });
  EXPECT_COMPX_ERROR(chat_complete(kMessages, local_config(server), t), ErrorCode::kHttpError);
  EXPECT_EQ(server.hits(), 4);
  EXPECT_EQ(delays, (std::vector<double>{1.0, 2.0, 4.0}));
}

TEST(Live, ClientErrorNotRetried) {
  EchoServer server(1, 401);
  LiveTransport t([](double) {});
  EXPECT_COMPX_ERROR(chat_complete(kMessages, local_config(server), t), ErrorCode::kHttpError);
  EXPECT_EQ(server.hits(), 1);
}

TEST(Live, EmptyCompletion) {
  EchoServer server;
  server.set_empty_reply();
  LiveTransport t([](double) {});
  EXPECT_COMPX_ERROR(chat_complete(kMessages, local_config(server), t),
                     ErrorCode::kEmptyCompletion);
}

TEST(Live, MissingKey) {
  EchoServer server;
  ChatConfig c = local_config(server);
  c.api_key.clear();
  LiveTransport t([](double) {});
  EXPECT_COMPX_ERROR(chat_complete(kMessages, c, t), ErrorCode::kAuthMissing);
  EXPECT_EQ(server.hits(), 0);
}

TEST(Live, UnreachableHostIsHttpError) {
  ChatConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.api_key = "k";
  c.max_retries = 1;
  c.timeout_s = 1;
  LiveTransport t([](double) {});
  EXPECT_COMPX_ERROR(chat_complete(kMessages, c, t), ErrorCode::kHttpError);
}

}  // namespace
}  // namespace compx::llm
