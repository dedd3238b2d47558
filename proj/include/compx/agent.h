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


#ifndef COMPX_AGENT_H_
#define COMPX_AGENT_H_

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "compx/codec.h"
#include "compx/imaging.h"
#include "compx/llmclient.h"
#include "compx/plan.h"
#include "compx/prompts.h"
#include "compx/segmenter.h"
#include "compx/trace.h"

// The compression agent: plan a request, encode, check the result against
// the requested windows, and refine the quality factors until it fits or
// the iteration cap is reached.
namespace compx::agent {

enum class PlannerMode { kLlm, kRules, kLlmWithFallback };
enum class ProposerKind { kBisection, kLlm };
enum class State { kPlanning, kPreAnalysis, kEncoding, kEvaluating, kRefining, kDone, kFailed };

std::string_view planner_mode_name(PlannerMode mode);
std::optional<PlannerMode> parse_planner_mode(std::string_view name);
std::string_view proposer_name(ProposerKind kind);
std::optional<ProposerKind> parse_proposer(std::string_view name);
std::string_view state_name(State state);
inline bool is_terminal(State s) { return s == State::kDone || s == State::kFailed; }

// Lower limit of a byte window derived from an upper limit alone.
inline constexpr double kByteWindowSpan = 256.0;
// Half-width of the window around a single performance target.
inline constexpr double kPerfTolerance = 0.25;
// q_roi - q_nonroi while refining a weighted_PSNR gate.
inline constexpr double kRoiOffset = 0.2;

struct ExecContext {
  const imaging::ImageBuffer* image = nullptr;
  // Null when the plan needs no segmentation; the whole image is one group.
  const codec::GroupMask* mask = nullptr;
  const plan::RequestPlan* plan = nullptr;
  const Constraints* constraints = nullptr;
};

struct ExecOutput {
  uint64_t bytes = 0;
  double metric_value = 0.0;
  std::string note;
  // Serialized container holding the transmitted groups only.
  std::vector<uint8_t> stream;
  imaging::ImageBuffer recon;
};

class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecOutput execute(const ExecContext& ctx, std::array<double, 2> q) = 0;
};

// Encodes with the bundled codec. Errors: LabelNotFound, DimensionMismatch.
ExecOutput execute_stage(const ExecContext& ctx, std::array<double, 2> q);

class CodecExecutor : public Executor {
 public:
  ExecOutput execute(const ExecContext& ctx, std::array<double, 2> q) override {
    return execute_stage(ctx, q);
  }
};

struct RecordedExecution {
  std::array<double, 2> q{};
  uint64_t bytes = 0;
  double performance = 0.0;
};

// Runs the codec for artifacts but reports recorded sizes and metric values.
// A q pair with no recording throws InvariantViolation, or is measured when
// `measure_unrecorded` is set.
class ReplayExecutor : public Executor {
 public:
  explicit ReplayExecutor(std::vector<RecordedExecution> records, bool measure_unrecorded = false);
  ExecOutput execute(const ExecContext& ctx, std::array<double, 2> q) override;

 private:
  std::vector<RecordedExecution> records_;
  bool measure_unrecorded_;
};

struct Deps {
  PlannerMode planner = PlannerMode::kRules;
  ProposerKind proposer = ProposerKind::kBisection;
  // Loaded from the default store when an LLM stage needs it and it is null.
  std::shared_ptr<const prompts::PromptBundle> bundle;
  // Defaults to a live transport when an LLM stage needs it and it is null.
  std::shared_ptr<llm::Transport> transport;
  llm::ChatConfig chat;
  // nullopt: segmentation unavailable.
  std::optional<segment::MaskSource> mask_source = segment::MaskSource{};
  std::shared_ptr<Executor> executor;
  // Overrides the plan's file_path.
  std::optional<std::filesystem::path> image_path;
  // Searched for relative file_path values.
  std::vector<std::filesystem::path> image_dirs;
  // Empty: no artifacts are written.
  std::filesystem::path session_dir;
  std::function<void(State)> on_state;
  std::function<void(const SessionTrace&)> on_progress;
};

std::filesystem::path default_image_dir();

// Errors: PlanningFailed (llm mode), transport errors. Fallback mode never
// throws; the reason lands in `warnings`.
plan::RequestPlan plan_stage(std::string_view instruction, const Deps& deps,
                             std::vector<std::string>& warnings);

// Throws InvariantViolation on inverted bounds.
Constraints derive_constraints(const plan::RequestPlan& plan);

// [0.5, 0.5] for requests with a numeric limit; otherwise the size-level
// preset (0.05, 0.25, 0.5, 0.75, 0.95).
std::array<double, 2> initial_q(const plan::RequestPlan& plan);

double roi_offset(const Constraints& c);
// (s + d/2, s - d/2), each clamped to [0, 1].
std::array<double, 2> q_from_level(double level, double offset);

// Midpoint of the level bracket implied by the history. The byte window
// decides where it is violated, the performance window otherwise.
// Errors: NoWindow, EmptyHistory.
double propose_level(const std::vector<Iteration>& history, const Constraints& c);
std::array<double, 2> propose_next(const std::vector<Iteration>& history, const Constraints& c);

// Last "q=[a, b]" in the reply, clamped to [0, 1]. Throws NoProposalFound.
std::array<double, 2> parse_proposal(std::string_view reply);

std::array<double, 2> llm_propose(const plan::RequestPlan& plan,
                                  const std::vector<Iteration>& history, const Constraints& c,
                                  const prompts::PromptBundle& bundle,
                                  const llm::ChatConfig& config, llm::Transport& transport);

bool satisfies(const Iteration& it, const Constraints& c);
Verdict evaluate_iteration(const Iteration& it, const Constraints& c);

// Among iterations inside the byte window, the best metric; failing that,
// the closest in bytes. Without a byte window, the closest in metric to the
// performance window.
std::optional<int> choose_best_effort(const std::vector<Iteration>& iterations,
                                      const Constraints& c);

// Fields the follow-up leaves at their defaults keep the previous values.
plan::RequestPlan merge_followup(const plan::RequestPlan& previous,
                                 const plan::RequestPlan& followup);

// Scripted session stored as data/fixtures/<name>.json.
struct Fixture {
  std::string name;
  std::string instruction;
  std::filesystem::path image;
  std::vector<std::string> replies;
  std::vector<RecordedExecution> executions;
};

// Errors: NotFound, CorruptFile.
Fixture load_fixture(std::string_view name);

// One session: a first request plus any follow-ups, sharing the image and
// mask. Segment k > 0 persists under <session_dir>/followup_<k>.
class Session {
 public:
  explicit Session(Deps deps);

  // Never throws for pipeline failures; they are recorded in the trace.
  const SessionTrace& run(std::string_view instruction);
  // Runs `run` when there is no previous segment.
  const SessionTrace& follow_up(std::string_view instruction);

  const std::vector<SessionTrace>& segments() const { return segments_; }
  const imaging::ImageBuffer* image() const { return image_ ? &*image_ : nullptr; }
  const codec::GroupMask* mask() const { return mask_ ? &*mask_ : nullptr; }
  const std::filesystem::path& image_path() const { return image_path_; }
  // Directory holding the artifacts of segment `k`.
  std::filesystem::path segment_dir(size_t k) const;

 private:
  const SessionTrace& execute(std::string_view instruction, bool followup);
  void run_loop(SessionTrace& trace, const std::filesystem::path& dir);
  void set_state(State s);
  void progress(const SessionTrace& trace);
  const prompts::PromptBundle& bundle();
  llm::Transport& transport();

  Deps deps_;
  std::vector<SessionTrace> segments_;
  std::optional<imaging::ImageBuffer> image_;
  std::optional<codec::GroupMask> mask_;
  std::filesystem::path image_path_;
};

SessionTrace run_session(std::string_view instruction, const Deps& deps);

}  // namespace compx::agent

#endif  // COMPX_AGENT_H_
