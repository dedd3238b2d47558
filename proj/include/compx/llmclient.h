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


#ifndef COMPX_LLMCLIENT_H_
#define COMPX_LLMCLIENT_H_

#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "compx/prompts.h"
#include "json.hpp"

// Chat-completion client for OpenAI-compatible endpoints.
namespace compx::llm {

struct ChatConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o";
  double temperature = 0.7;
  int max_retries = 3;
  double timeout_s = 60.0;
  // Delay before retry k (0-based) is backoff_base_s * 2^k.
  double backoff_base_s = 1.0;
  std::string api_key;

  // Reads COMPX_API_KEY, COMPX_BASE_URL and COMPX_MODEL.
  static ChatConfig from_env();
  // Throws OutOfRange.
  void validate() const;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string complete(const std::vector<prompts::PromptMessage>& messages,
                               const ChatConfig& config) = 0;
  virtual std::string_view kind() const = 0;
};

// Canned replies consumed in FIFO order. Every request is recorded.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::vector<std::string> replies);

  std::string complete(const std::vector<prompts::PromptMessage>& messages,
                       const ChatConfig& config) override;
  std::string_view kind() const override { return "scripted"; }

  size_t remaining() const;
  std::vector<std::vector<prompts::PromptMessage>> requests() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> replies_;
  std::vector<std::vector<prompts::PromptMessage>> requests_;
};

class LiveTransport : public Transport {
 public:
  using Sleeper = std::function<void(double seconds)>;
  LiveTransport();
  explicit LiveTransport(Sleeper sleeper);

  std::string complete(const std::vector<prompts::PromptMessage>& messages,
                       const ChatConfig& config) override;
  std::string_view kind() const override { return "live"; }

 private:
  Sleeper sleep_;
};

// {model, messages: [{role, content}], temperature}
nlohmann::json request_body(const std::vector<prompts::PromptMessage>& messages,
                            const ChatConfig& config);

// Errors: AuthMissing, HttpError, EmptyCompletion, ScriptExhausted,
// InvariantViolation (no messages).
std::string chat_complete(const std::vector<prompts::PromptMessage>& messages,
                          const ChatConfig& config, Transport& transport);

}  // namespace compx::llm

#endif  // COMPX_LLMCLIENT_H_
