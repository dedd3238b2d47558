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

#include "compx/prompts.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "compx/error.h"
#include "compx/metrics.h"
#include "text_util.h"

namespace compx::prompts {

namespace {

using nlohmann::json;
using text::format_number;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::string s{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return s;
}

Speaker parse_speaker(const std::string& s, const std::string& source) {
  if (s == "user_request") return Speaker::kUserRequest;
  if (s == "agent") return Speaker::kAgent;
  if (s == "expert") return Speaker::kExpert;
  throw Error(ErrorCode::kInvalidTranscript, source + ": unknown speaker '" + s + "'");
}

Role role_of(Speaker s) {
  return s == Speaker::kAgent ? Role::kAssistant : Role::kUser;
}

std::string window_text(const std::optional<agent::Window>& w, const std::string& unit) {
  if (!w) return "no limit";
  auto show = [](double v) { return metrics::format_db(v, 4); };
  if (unit == "bytes") {
    return "between " + format_number(w->lo) + " and " + format_number(w->hi) + " bytes";
  }
  if (std::isinf(w->hi)) return "at least " + show(w->lo) + unit;
  return "between " + show(w->lo) + " and " + show(w->hi) + unit;
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::filesystem::path default_store_dir() {
  return std::filesystem::path(COMPX_DATA_DIR) / "prompts";
}

ExpertTranscript parse_transcript(const json& j, const std::string& source) {
  auto fail = [&source](const std::string& why) {
    return Error(ErrorCode::kInvalidTranscript, source + ": " + why);
  };
  if (!j.is_object()) throw fail("not a JSON object");
  ExpertTranscript t;
  if (!j.contains("id") || !j["id"].is_string()) throw fail("missing string id");
  t.id = j["id"].get<std::string>();
  if (!j.contains("turns") || !j["turns"].is_array() || j["turns"].empty()) {
    throw fail("missing turns");
  }
  for (const auto& turn : j["turns"]) {
    if (!turn.is_object() || !turn.contains("speaker") || !turn.contains("content") ||
        !turn["speaker"].is_string() || !turn["content"].is_string()) {
      throw fail("turn needs string speaker and content");
    }
    Turn parsed{parse_speaker(turn["speaker"].get<std::string>(), source),
                turn["content"].get<std::string>()};
    if (text::trim(parsed.content).empty()) throw fail("empty turn content");
    t.turns.push_back(std::move(parsed));
  }
  if (t.turns.front().speaker != Speaker::kUserRequest) {
    throw fail("first turn must be the user request");
  }
  if (std::none_of(t.turns.begin(), t.turns.end(),
                   [](const Turn& x) { return x.speaker == Speaker::kExpert; })) {
    throw fail("no expert turn");
  }
  if (!j.contains("final_plan")) throw fail("missing final_plan");
  const auto last_agent = std::find_if(t.turns.rbegin(), t.turns.rend(), [](const Turn& x) {
    return x.speaker == Speaker::kAgent;
  });
  if (last_agent == t.turns.rend()) throw fail("no agent turn");
  try {
    const json& fp = j["final_plan"];
    t.final_plan = plan::normalize(fp.is_string() ? plan::parse_plan_text(fp.get<std::string>())
                                                  : plan::plan_from_json(fp));
    const plan::RequestPlan answered = plan::normalize(plan::parse_plan_text(last_agent->content));
    if (!(answered == t.final_plan)) throw fail("last agent turn does not match final_plan");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidTranscript) throw;
    throw fail(std::string("plan does not parse: ") + e.what());
  }
  return t;
}

PromptBundle load_store(const std::filesystem::path& dir) {
  PromptBundle b;
  b.planning_system = read_text(dir / "planning_system.txt");
  b.refinement_system = read_text(dir / "refinement_system.txt");
  if (text::trim(b.planning_system).empty()) {
    throw Error(ErrorCode::kMissingFile, "planning_system.txt is empty");
  }
  const auto tdir = dir / "transcripts";
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  if (std::filesystem::is_directory(tdir, ec)) {
    for (const auto& entry : std::filesystem::directory_iterator(tdir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const json j = json::parse(read_text(f), nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kInvalidTranscript, f.filename().string() + ": invalid JSON");
    }
    b.transcripts.push_back(parse_transcript(j, f.filename().string()));
  }
  return b;
}

std::vector<PromptMessage> build_planning_messages(const PromptBundle& bundle,
                                                   std::string_view instruction) {
  std::vector<PromptMessage> out;
  out.push_back({Role::kSystem, bundle.planning_system});
  for (const auto& t : bundle.transcripts) {
    for (const auto& turn : t.turns) {
      std::string content = turn.content;
      if (turn.speaker == Speaker::kExpert) content = std::string(kExpertPrefix) + content;
      out.push_back({role_of(turn.speaker), std::move(content)});
    }
  }
  out.push_back({Role::kUser, std::string(instruction)});
  return out;
}

std::string history_line(const agent::Iteration& it) {
  std::ostringstream s;
  s << "iteration " << it.index << ", q_factor: [" << format_number(it.q_factors[0]) << ", "
    << format_number(it.q_factors[1]) << "], bytes: " << it.bytes
    << ", performance: " << metrics::format_db(it.metric_value, 4);
  return s.str();
}

std::vector<PromptMessage> build_refinement_messages(
    const PromptBundle& bundle, const plan::RequestPlan& plan,
    const agent::Constraints& constraints, const std::vector<agent::Iteration>& history) {
  if (history.empty()) throw Error(ErrorCode::kEmptyHistory, "refinement needs history");
  std::ostringstream u;
  u << "User requirements:\n";
  u << "- image: " << plan.file_path << "\n";
  u << "- compression mode: " << codec::task_name(plan.compression_mode) << "\n";
  if (plan.roi_coding) {
    u << "- region of interest: " << plan.roi_object.value_or("foreground") << "\n";
  }
  u << "- performance metric: " << constraints.gate_metric.to_string() << "\n";
  u << "- bitrate: " << window_text(constraints.byte_window, "bytes") << "\n";
  u << "- performance: " << window_text(constraints.perf_window, " dB") << "\n";
  u << "- q_factor: [RoI q, non-RoI q], each in [0, 1]\n";
  u << "\nHistory result:\n";
  for (const auto& it : history) u << history_line(it) << "\n";
  u << "\nSuggest new q values. End your reply with one line of the form q=[a, b].";
  return {{Role::kSystem, bundle.refinement_system}, {Role::kUser, u.str()}};
}

}  // namespace compx::prompts
