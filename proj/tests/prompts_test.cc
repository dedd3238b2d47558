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

#include <fstream>
#include <set>

#include "compx/error.h"
#include "test_util.h"

namespace compx::prompts {
namespace {

using compx::testing::TempDir;
using nlohmann::json;

void write(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

json sample_transcript() {
  return json::parse(R"j({
    "id": "t1",
    "turns": [
      {"speaker": "user_request", "content": "Compress a.png to under 10 KB."},
      {"speaker": "agent", "content": "{\"file_path\": \"a.png\", \"specific_bitrate_limit\": true, \"bitrate_max\": 10, \"bitrate_unit\": \"MB\"}"},
      {"speaker": "expert", "content": "The user said KB."},
      {"speaker": "agent", "content": "{\"file_path\": \"a.png\", \"specific_bitrate_limit\": true, \"bitrate_max\": 10, \"bitrate_unit\": \"KB\"}"}
    ],
    "final_plan": {"file_path": "a.png", "specific_bitrate_limit": true, "bitrate_max": 10, "bitrate_unit": "KB"}
  })j");
}

void make_store(const std::filesystem::path& dir) {
  write(dir / "planning_system.txt", "You plan.");
  write(dir / "refinement_system.txt", "You refine.");
}

agent::Iteration iter(int k, double a, double b, uint64_t bytes, double perf) {
  agent::Iteration it;
  it.index = k;
  it.q_factors = {a, b};
  it.bytes = bytes;
  it.metric_value = perf;
  return it;
}

TEST(LoadStore, EmptyTranscriptDirectory) {
  TempDir tmp;
  make_store(tmp.path());
  std::filesystem::create_directories(tmp / "transcripts");
  const PromptBundle b = load_store(tmp.path());
  EXPECT_EQ(b.planning_system, "You plan.");
  EXPECT_EQ(b.refinement_system, "You refine.");
  EXPECT_TRUE(b.transcripts.empty());
}

TEST(LoadStore, MissingFiles) {
  TempDir tmp;
  EXPECT_COMPX_ERROR(load_store(tmp.path()), ErrorCode::kMissingFile);
  write(tmp / "planning_system.txt", "x");
  EXPECT_COMPX_ERROR(load_store(tmp.path()), ErrorCode::kMissingFile);
  write(tmp / "planning_system.txt", "  \n");
  write(tmp / "refinement_system.txt", "y");
  EXPECT_COMPX_ERROR(load_store(tmp.path()), ErrorCode::kMissingFile);
}

TEST(LoadStore, TranscriptWithoutExpertRejected) {
  TempDir tmp;
  make_store(tmp.path());
  json t = sample_transcript();
  t["turns"].erase(2);
  write(tmp / "transcripts" / "bad.json", t.dump());
  EXPECT_COMPX_ERROR(load_store(tmp.path()), ErrorCode::kInvalidTranscript);
}

TEST(LoadStore, MalformedJsonRejected) {
  TempDir tmp;
  make_store(tmp.path());
  write(tmp / "transcripts" / "bad.json", "{not json");
  EXPECT_COMPX_ERROR(load_store(tmp.path()), ErrorCode::kInvalidTranscript);
}

TEST(LoadStore, FileNameOrder) {
  TempDir tmp;
  make_store(tmp.path());
  json t = sample_transcript();
  t["id"] = "second";
  write(tmp / "transcripts" / "b.json", t.dump());
  t["id"] = "first";
  write(tmp / "transcripts" / "a.json", t.dump());
  write(tmp / "transcripts" / "notes.txt", "ignored");
  const PromptBundle b = load_store(tmp.path());
  ASSERT_EQ(b.transcripts.size(), 2u);
  EXPECT_EQ(b.transcripts[0].id, "first");
  EXPECT_EQ(b.transcripts[1].id, "second");
}

TEST(LoadStore, BundledStoreCoversEveryMode) {
  const PromptBundle b = load_store(default_store_dir());
  ASSERT_EQ(b.transcripts.size(), 6u);
  std::set<codec::TaskKind> modes;
  for (const auto& t : b.transcripts) modes.insert(t.final_plan.compression_mode);
  EXPECT_EQ(modes.size(), 6u);
  EXPECT_NE(b.planning_system.find("file_path"), std::string::npos);
  EXPECT_NE(b.refinement_system.find("q="), std::string::npos);
}

TEST(ParseTranscript, Valid) {
  const ExpertTranscript t = parse_transcript(sample_transcript(), "t");
  EXPECT_EQ(t.id, "t1");
  ASSERT_EQ(t.turns.size(), 4u);
  EXPECT_EQ(t.turns[2].speaker, Speaker::kExpert);
  ASSERT_TRUE(t.final_plan.bitrate_unit.has_value());
  EXPECT_EQ(*t.final_plan.bitrate_unit, plan::ByteUnit::kKB);
}

TEST(ParseTranscript, FinalPlanAsSchemaText) {
  json t = sample_transcript();
  t["final_plan"] = t["turns"][3]["content"];
  EXPECT_NO_THROW(parse_transcript(t, "t"));
}

TEST(ParseTranscript, Rejections) {
  const std::vector<std::function<void(json&)>> breakers = {
      [](json& t) { t.erase("id"); },
      [](json& t) { t["turns"] = json::array(); },
      [](json& t) { t.erase("final_plan"); },
      [](json& t) { t["turns"][0]["speaker"] = "narrator"; },
      [](json& t) { t["turns"][0]["speaker"] = "agent"; },
      [](json& t) { t["turns"][2]["content"] = " "; },
      [](json& t) { t["final_plan"]["bitrate_unit"] = "MB"; },
      [](json& t) { t["turns"][3]["content"] = "no plan here"; },
      [](json& t) { t = json::array(); },
  };
  for (size_t i = 0; i < breakers.size(); ++i) {
    json t = sample_transcript();
    breakers[i](t);
    SCOPED_TRACE(i);
    EXPECT_COMPX_ERROR(parse_transcript(t, "t"), ErrorCode::kInvalidTranscript);
  }
}

TEST(PlanningMessages, NoTranscripts) {
  PromptBundle b{"sys", "ref", {}};
  const auto m = build_planning_messages(b, "Compress x.png");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], (PromptMessage{Role::kSystem, "sys"}));
  EXPECT_EQ(m[1], (PromptMessage{Role::kUser, "Compress x.png"}));
}

TEST(PlanningMessages, OneTranscriptLayout) {
  PromptBundle b{"sys", "ref", {parse_transcript(sample_transcript(), "t")}};
  const auto m = build_planning_messages(b, "live");
  ASSERT_EQ(m.size(), 6u);
  EXPECT_EQ(m[1].role, Role::kUser);
  EXPECT_EQ(m[2].role, Role::kAssistant);
  EXPECT_EQ(m[3].role, Role::kUser);
  EXPECT_EQ(m[3].content, "Expert feedback: The user said KB.");
  EXPECT_EQ(m[4].role, Role::kAssistant);
  EXPECT_EQ(m[5].content, "live");
}

TEST(PlanningMessages, CountOverBundledStore) {
  const PromptBundle b = load_store(default_store_dir());
  size_t turns = 0;
  for (const auto& t : b.transcripts) turns += t.turns.size();
  const auto m = build_planning_messages(b, "x");
  EXPECT_EQ(m.size(), 2 + turns);
  EXPECT_EQ(build_planning_messages(b, "x"), m);
}

TEST(HistoryLine, Format) {
  EXPECT_EQ(history_line(iter(0, 0.5, 0.5, 5255, 28.6174)),
            "iteration 0, q_factor: [0.5, 0.5], bytes: 5255, performance: 28.6174");
  EXPECT_EQ(history_line(iter(3, 0.91, 0.75, 16567, 34.02381)),
            "iteration 3, q_factor: [0.91, 0.75], bytes: 16567, performance: 34.0238");
}

TEST(RefinementMessages, Shape) {
  PromptBundle b{"sys", "ref", {}};
  plan::RequestPlan p = plan::rule_parse(
      "Compress parrots.png to under 15000 bytes and keep the parrots clear.");
  agent::Constraints c;
  c.byte_window = agent::Window{14744, 15000};
  c.gate_metric = plan::MetricSpec::weighted(0.8, 0.2);
  const auto m = build_refinement_messages(
      b, p, c, {iter(0, 0.5, 0.5, 5255, 28.6174), iter(1, 0.8, 0.6, 10254, 31.9122)});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], (PromptMessage{Role::kSystem, "ref"}));
  EXPECT_EQ(m[1].role, Role::kUser);
  const std::string& u = m[1].content;
  EXPECT_NE(u.find("iteration 0, q_factor: [0.5, 0.5], bytes: 5255"), std::string::npos);
  EXPECT_NE(u.find("between 14744 and 15000 bytes"), std::string::npos);
  EXPECT_NE(u.find("weighted_PSNR(0.8, 0.2)"), std::string::npos);
  const size_t first = u.find("iteration 0");
  const size_t second = u.find("iteration 1");
  ASSERT_NE(second, std::string::npos);
  EXPECT_LT(first, second);
  size_t lines = 0;
  for (size_t pos = u.find("\niteration "); pos != std::string::npos;
       pos = u.find("\niteration ", pos + 1)) {
    ++lines;
  }
  EXPECT_EQ(lines, 2u);
}

TEST(RefinementMessages, PerformanceWindow) {
  PromptBundle b{"sys", "ref", {}};
  agent::Constraints c;
  c.perf_window = agent::Window{32.0, std::numeric_limits<double>::infinity()};
  const auto m = build_refinement_messages(b, plan::RequestPlan{}, c, {iter(0, 0.5, 0.5, 1, 30)});
  EXPECT_NE(m[1].content.find("bitrate: no limit"), std::string::npos);
  EXPECT_NE(m[1].content.find("performance: at least 32.0000 dB"), std::string::npos);
}

TEST(RefinementMessages, EmptyHistory) {
  PromptBundle b{"sys", "ref", {}};
  EXPECT_COMPX_ERROR(build_refinement_messages(b, plan::RequestPlan{}, agent::Constraints{}, {}),
                     ErrorCode::kEmptyHistory);
}

}  // namespace
}  // namespace compx::prompts
