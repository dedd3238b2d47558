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

#ifndef COMPX_PROMPTS_H_
#define COMPX_PROMPTS_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "compx/plan.h"
#include "compx/trace.h"
#include "json.hpp"

// Prompt store and chat-message assembly for the planning and refinement
// calls.
//
// Store layout:
//   <dir>/planning_system.txt
//   <dir>/refinement_system.txt
//   <dir>/transcripts/*.json   {id, turns: [{speaker, content}], final_plan}
namespace compx::prompts {

enum class Role { kSystem, kUser, kAssistant };
std::string_view role_name(Role role);

struct PromptMessage {
  Role role = Role::kUser;
  std::string content;
  bool operator==(const PromptMessage&) const = default;
};

enum class Speaker { kUserRequest, kAgent, kExpert };

struct Turn {
  Speaker speaker = Speaker::kUserRequest;
  std::string content;
};

// A demonstration dialogue in which an expert corrects the agent. The last
// agent turn must parse to `final_plan`.
struct ExpertTranscript {
  std::string id;
  std::vector<Turn> turns;
  plan::RequestPlan final_plan;
};

struct PromptBundle {
  std::string planning_system;
  std::string refinement_system;
  std::vector<ExpertTranscript> transcripts;
};

inline constexpr std::string_view kExpertPrefix = "Expert feedback: ";

// Errors: MissingFile, InvalidTranscript. Transcripts load in file-name
// order.
PromptBundle load_store(const std::filesystem::path& dir);
// The store under the installed data directory.
std::filesystem::path default_store_dir();

// Throws InvalidTranscript; `source` names the file in messages.
ExpertTranscript parse_transcript(const nlohmann::json& j, const std::string& source);

std::vector<PromptMessage> build_planning_messages(const PromptBundle& bundle,
                                                   std::string_view instruction);

// "iteration 0, q_factor: [0.5, 0.5], bytes: 5255, performance: 28.6174"
std::string history_line(const agent::Iteration& it);

// Throws EmptyHistory.
std::vector<PromptMessage> build_refinement_messages(
    const PromptBundle& bundle, const plan::RequestPlan& plan,
    const agent::Constraints& constraints, const std::vector<agent::Iteration>& history);

}  // namespace compx::prompts

#endif  // COMPX_PROMPTS_H_
