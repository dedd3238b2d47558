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


#ifndef COMPX_CLI_H_
#define COMPX_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "compx/codec.h"
#include "compx/llmclient.h"

namespace compx::cli {

// Defaults that compx.toml, the environment and flags override, in that
// order.
struct Settings {
  llm::ChatConfig chat;
  float quality = 0.5f;
  codec::TaskKind profile = codec::TaskKind::kDistortion;
  std::string planner = "rules";
  std::string proposer = "bisection";
};

// `key = value` lines; `#` starts a comment; values may be quoted. A
// `[chat]` or `[codec]` header prefixes the keys that follow. Recognized
// keys: base_url, model, api_key, temperature, max_retries, timeout_s,
// backoff_base_s, planner, proposer, codec.quality, codec.profile.
// Throws ConfigError naming the line.
Settings parse_config(std::string_view text, Settings base = {});
// Throws NotFound, ConfigError.
Settings load_config(const std::filesystem::path& path, Settings base = {});
// COMPX_API_KEY, COMPX_BASE_URL, COMPX_MODEL.
void apply_env(Settings& settings);

// `args` excludes the program name. Exit codes: 0 success, 1 domain error
// (code name on stderr), 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Ends a running `serve`. Safe to call from a signal handler.
void request_shutdown();

}  // namespace compx::cli

#endif  // COMPX_CLI_H_
