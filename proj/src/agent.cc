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


#include "compx/agent.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>

#include "compx/container.h"
#include "compx/error.h"
#include "compx/metrics.h"
#include "text_util.h"

namespace compx::agent {

namespace {

using plan::MetricSpec;
using plan::RequestPlan;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

bool same_q(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::abs(a[0] - b[0]) < 1e-9 && std::abs(a[1] - b[1]) < 1e-9;
}

std::vector<std::string> split_objects(const std::string& text) {
  static const std::regex sep(R"(\s*(?:,|\band\b|&|/)\s*)");
  std::vector<std::string> out;
  for (std::sregex_token_iterator it(text.begin(), text.end(), sep, -1), end; it != end; ++it) {
    std::string part = plan::canonical_object(it->str());
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::set<uint16_t> nonzero_groups(const codec::GroupMask& mask) {
  std::set<uint16_t> out;
  for (const auto& [id, label] : mask.labels()) {
    if (id != 0) out.insert(id);
  }
  return out;
}

// nullopt means every group. Throws LabelNotFound.
std::optional<std::set<uint16_t>> resolve_groups(const codec::GroupMask& mask,
                                                 const std::string& phrase) {
  const std::string canon = plan::canonical_object(phrase);
  if (canon.empty() || canon == "all") return std::nullopt;
  std::set<uint16_t> out;
  for (const std::string& part : split_objects(canon)) {
    if (part == "all") return std::nullopt;
    if (part == "foreground") {
      const auto fg = nonzero_groups(mask);
      out.insert(fg.begin(), fg.end());
      continue;
    }
    if (part == "background") {
      out.insert(0);
      continue;
    }
    auto found = mask.find_label(part);
    if (found.empty()) {
      for (const auto& [id, label] : mask.labels()) {
        if (plan::canonical_object(label) == part) found.insert(id);
      }
    }
    if (found.empty()) throw Error(ErrorCode::kLabelNotFound, "no mask group labeled '" + part + "'");
    out.insert(found.begin(), found.end());
  }
  if (out.empty()) throw Error(ErrorCode::kLabelNotFound, "no mask group for '" + phrase + "'");
  return out;
}

bool needs_mask(const RequestPlan& p) {
  const std::string t = plan::canonical_object(p.objects_to_transmit);
  return p.roi_coding || (t != "all" && !t.empty());
}

// Phrase handed to the segmenter for its foreground group.
std::string mask_phrase(const RequestPlan& p) {
  if (p.roi_coding && p.roi_object) return *p.roi_object;
  const std::string t = plan::canonical_object(p.objects_to_transmit);
  if (t != "all" && t != "foreground" && t != "background" && !t.empty()) return t;
  return "foreground";
}

double distance_to(const Window& w, double v) {
  if (v < w.lo) return w.lo - v;
  if (v > w.hi) return v - w.hi;
  return 0.0;
}

// -1 below the window, +1 above, 0 inside.
int side(const Window& w, double v) {
  if (v < w.lo) return -1;
  if (v > w.hi) return 1;
  return 0;
}

void write_bytes(const std::filesystem::path& p, std::span<const uint8_t> bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
}

void write_json(const std::filesystem::path& p, const nlohmann::ordered_json& j) {
  const std::string s = j.dump(2) + "\n";
  write_bytes(p, std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

imaging::ImageBuffer mask_image(const codec::GroupMask& mask) {
  imaging::ImageBuffer img(mask.width(), mask.height(), 1);
  for (size_t i = 0; i < mask.ids().size(); ++i) {
    img.data()[i] = static_cast<uint8_t>(std::min<uint16_t>(mask.ids()[i], 255));
  }
  return img;
}

}  // namespace

std::string_view planner_mode_name(PlannerMode mode) {
  switch (mode) {
    case PlannerMode::kLlm: return "llm";
    case PlannerMode::kRules: return "rules";
    case PlannerMode::kLlmWithFallback: return "llm_with_fallback";
  }
  return "rules";
}

std::optional<PlannerMode> parse_planner_mode(std::string_view name) {
  for (auto m : {PlannerMode::kLlm, PlannerMode::kRules, PlannerMode::kLlmWithFallback}) {
    if (planner_mode_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view proposer_name(ProposerKind kind) {
  return kind == ProposerKind::kLlm ? "llm" : "bisection";
}

std::optional<ProposerKind> parse_proposer(std::string_view name) {
  if (name == "llm") return ProposerKind::kLlm;
  if (name == "bisection") return ProposerKind::kBisection;
  return std::nullopt;
}

std::string_view state_name(State state) {
  switch (state) {
    case State::kPlanning: return "planning";
    case State::kPreAnalysis: return "pre_analysis";
    case State::kEncoding: return "encoding";
    case State::kEvaluating: return "evaluating";
    case State::kRefining: return "refining";
    case State::kDone: return "done";
    case State::kFailed: return "failed";
  }
  return "failed";
}

std::filesystem::path default_image_dir() {
  return std::filesystem::path(COMPX_DATA_DIR) / "images";
}

ExecOutput execute_stage(const ExecContext& ctx, std::array<double, 2> q) {
  const imaging::ImageBuffer& image = *ctx.image;
  const RequestPlan& p = *ctx.plan;
  const codec::GroupMask whole(image.width(), image.height());
  const codec::GroupMask& mask = ctx.mask ? *ctx.mask : whole;
  ExecOutput out;
  std::vector<std::string> notes;

  std::set<uint16_t> roi;
  if (p.roi_coding) {
    try {
      auto groups = resolve_groups(mask, p.roi_object.value_or("foreground"));
      roi = groups ? *groups : nonzero_groups(mask);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kLabelNotFound) throw;
      roi = nonzero_groups(mask);
      notes.push_back("RoI label not in mask; using all foreground groups");
    }
  }
  const auto transmit = resolve_groups(mask, p.objects_to_transmit);

  q = {clamp01(q[0]), clamp01(q[1])};
  const codec::QualityMap qmap =
      p.roi_coding ? segment::quality_map_for_groups(mask, roi, static_cast<float>(q[0]),
                                                     static_cast<float>(q[1]))
                   : codec::QualityMap(image.width(), image.height(), static_cast<float>(q[0]));
  const container::Container full = codec::encode(
      image, qmap, mask, codec::TaskProfile::for_kind(p.compression_mode));
  const container::Container sent = transmit ? container::extract(full, *transmit) : full;
  out.stream = container::serialize(sent);
  out.bytes = out.stream.size();
  out.recon = codec::decode(sent, transmit);

  const MetricSpec gate = ctx.constraints ? ctx.constraints->gate_metric
                                          : MetricSpec{MetricSpec::Kind::kPsnr};
  if (gate.kind == MetricSpec::Kind::kWeightedPsnr) {
    std::vector<uint8_t> region(mask.ids().size());
    for (size_t i = 0; i < region.size(); ++i) region[i] = roi.count(mask.ids()[i]) ? 1 : 0;
    out.metric_value = metrics::weighted_psnr(image, out.recon, region,
                                              {gate.roi_ratio, gate.nonroi_ratio});
  } else {
    out.metric_value = metrics::psnr(image, out.recon);
  }
  if (ctx.constraints && ctx.constraints->proxied_metric) {
    notes.push_back("PSNR stands in for " + ctx.constraints->proxied_metric->to_string());
  }
  for (size_t i = 0; i < notes.size(); ++i) out.note += (i ? "; " : "") + notes[i];
  return out;
}

ReplayExecutor::ReplayExecutor(std::vector<RecordedExecution> records, bool measure_unrecorded)
    : records_(std::move(records)), measure_unrecorded_(measure_unrecorded) {}

ExecOutput ReplayExecutor::execute(const ExecContext& ctx, std::array<double, 2> q) {
  const auto it = std::find_if(records_.begin(), records_.end(),
                               [&](const RecordedExecution& r) { return same_q(r.q, q); });
  if (it == records_.end()) {
    if (measure_unrecorded_) {
      ExecOutput out = execute_stage(ctx, q);
      out.note = out.note.empty() ? "measured" : "measured; " + out.note;
      return out;
    }
    throw Error(ErrorCode::kInvariantViolation,
                "no recorded execution for q=[" + text::format_number(q[0]) + ", " +
                    text::format_number(q[1]) + "]");
  }
  ExecOutput out = execute_stage(ctx, q);
  out.bytes = it->bytes;
  out.metric_value = it->performance;
  out.note = out.note.empty() ? "replayed" : "replayed; " + out.note;
  return out;
}

plan::RequestPlan plan_stage(std::string_view instruction, const Deps& deps,
                             std::vector<std::string>& warnings) {
  if (deps.planner == PlannerMode::kRules) return plan::rule_parse(instruction);
  if (!deps.bundle || !deps.transport) {
    throw Error(ErrorCode::kInvariantViolation, "llm planning needs a prompt bundle and transport");
  }
  try {
    const auto messages = prompts::build_planning_messages(*deps.bundle, instruction);
    const std::string reply = llm::chat_complete(messages, deps.chat, *deps.transport);
    try {
      return plan::normalize(plan::parse_plan_text(reply));
    } catch (const Error& e) {
      throw Error(ErrorCode::kPlanningFailed, std::string("unusable planner output: ") + e.what());
    }
  } catch (const Error& e) {
    if (deps.planner == PlannerMode::kLlm) throw;
    warnings.push_back(std::string("llm planning failed (") + std::string(e.name()) +
                       "); used the rule planner");
    return plan::rule_parse(instruction);
  }
}

Constraints derive_constraints(const plan::RequestPlan& p) {
  Constraints c;
  if (p.specific_bitrate_limit && p.bitrate_max && p.bitrate_unit) {
    const double hi = static_cast<double>(plan::size_to_bytes(*p.bitrate_max, *p.bitrate_unit));
    const double lo = p.bitrate_min
                          ? static_cast<double>(plan::size_to_bytes(*p.bitrate_min, *p.bitrate_unit))
                          : std::max(0.0, hi - kByteWindowSpan);
    if (lo > hi) throw Error(ErrorCode::kInvariantViolation, "bitrate_min exceeds bitrate_max");
    c.byte_window = Window{lo, hi};
  }
  if (p.specific_performance_limit && (p.performance_min || p.performance_max)) {
    Window w;
    if (p.performance_min && p.performance_max) {
      w = {*p.performance_min, *p.performance_max};
    } else if (p.performance_max) {
      w = {*p.performance_max - kPerfTolerance, *p.performance_max + kPerfTolerance};
    } else {
      w = {*p.performance_min, std::numeric_limits<double>::infinity()};
    }
    if (w.lo > w.hi) {
      throw Error(ErrorCode::kInvariantViolation, "performance_min exceeds performance_max");
    }
    c.perf_window = w;
  }
  const auto computable = std::find_if(p.performance_metric.begin(), p.performance_metric.end(),
                                       [](const MetricSpec& m) { return m.computable(); });
  if (computable != p.performance_metric.end()) {
    c.gate_metric = *computable;
  } else {
    c.gate_metric = MetricSpec{MetricSpec::Kind::kPsnr};
    if (!p.performance_metric.empty()) c.proxied_metric = p.performance_metric.front();
  }
  return c;
}

std::array<double, 2> initial_q(const plan::RequestPlan& p) {
  if (p.specific_bitrate_limit || p.specific_performance_limit) return {0.5, 0.5};
  double q = 0.5;
  switch (p.encoded_size_level) {
    case plan::SizeLevel::kMinimum: q = 0.05; break;
    case plan::SizeLevel::kSmall: q = 0.25; break;
    case plan::SizeLevel::kMedium: q = 0.5; break;
    case plan::SizeLevel::kLarge: q = 0.75; break;
    case plan::SizeLevel::kMaximum: q = 0.95; break;
  }
  return {q, q};
}

double roi_offset(const Constraints& c) {
  return c.gate_metric.kind == MetricSpec::Kind::kWeightedPsnr ? kRoiOffset : 0.0;
}

std::array<double, 2> q_from_level(double level, double offset) {
  return {clamp01(level + offset / 2), clamp01(level - offset / 2)};
}

double propose_level(const std::vector<Iteration>& history, const Constraints& c) {
  if (!c.has_window()) throw Error(ErrorCode::kNoWindow, "nothing to refine toward");
  if (history.empty()) throw Error(ErrorCode::kEmptyHistory, "bisection needs history");
  double lo = 0.0, hi = 1.0;
  for (const Iteration& it : history) {
    int s = 0;
    if (c.byte_window) s = side(*c.byte_window, static_cast<double>(it.bytes));
    if (s == 0 && c.perf_window) s = side(*c.perf_window, it.metric_value);
    if (s < 0) lo = std::max(lo, it.level);
    if (s > 0) hi = std::min(hi, it.level);
  }
  return (lo + hi) / 2;
}

std::array<double, 2> propose_next(const std::vector<Iteration>& history, const Constraints& c) {
  return q_from_level(propose_level(history, c), roi_offset(c));
}

std::array<double, 2> parse_proposal(std::string_view reply) {
  static const std::regex re(
      R"(q\s*=\s*\[\s*([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)\s*,\s*([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)\s*\])",
      std::regex::icase);
  const std::string s(reply);
  std::smatch last;
  bool found = false;
  for (std::sregex_iterator it(s.begin(), s.end(), re), end; it != end; ++it) {
    last = *it;
    found = true;
  }
  if (!found) throw Error(ErrorCode::kNoProposalFound, "reply has no q=[a, b] line");
  return {clamp01(std::stod(last[1].str())), clamp01(std::stod(last[2].str()))};
}

std::array<double, 2> llm_propose(const plan::RequestPlan& p,
                                  const std::vector<Iteration>& history, const Constraints& c,
                                  const prompts::PromptBundle& bundle,
                                  const llm::ChatConfig& config, llm::Transport& transport) {
  if (!c.has_window()) throw Error(ErrorCode::kNoWindow, "nothing to refine toward");
  const auto messages = prompts::build_refinement_messages(bundle, p, c, history);
  return parse_proposal(llm::chat_complete(messages, config, transport));
}

bool satisfies(const Iteration& it, const Constraints& c) {
  if (c.byte_window && !c.byte_window->contains(static_cast<double>(it.bytes))) return false;
  if (c.perf_window && !c.perf_window->contains(it.metric_value)) return false;
  return true;
}

Verdict evaluate_iteration(const Iteration& it, const Constraints& c) {
  if (satisfies(it, c)) return Verdict::kAccept;
  if (it.index >= kMaxIterations - 1) return Verdict::kStopBestEffort;
  return Verdict::kContinue;
}

std::optional<int> choose_best_effort(const std::vector<Iteration>& iterations,
                                      const Constraints& c) {
  if (iterations.empty()) return std::nullopt;
  const Iteration* best = nullptr;
  if (c.byte_window) {
    for (const auto& it : iterations) {
      if (!c.byte_window->contains(static_cast<double>(it.bytes))) continue;
      if (!best || it.metric_value > best->metric_value) best = &it;
    }
    if (best) return best->index;
    for (const auto& it : iterations) {
      if (!best || distance_to(*c.byte_window, static_cast<double>(it.bytes)) <
                       distance_to(*c.byte_window, static_cast<double>(best->bytes))) {
        best = &it;
      }
    }
    return best->index;
  }
  if (c.perf_window) {
    for (const auto& it : iterations) {
      if (!best || distance_to(*c.perf_window, it.metric_value) <
                       distance_to(*c.perf_window, best->metric_value)) {
        best = &it;
      }
    }
    return best->index;
  }
  return iterations.back().index;
}

plan::RequestPlan merge_followup(const plan::RequestPlan& prev, const plan::RequestPlan& f) {
  const RequestPlan defaults = plan::rule_parse("");
  RequestPlan m = prev;
  m.warnings.clear();
  if (!f.file_path.empty()) m.file_path = f.file_path;
  if (f.compression_mode != defaults.compression_mode) {
    m.compression_mode = f.compression_mode;
    m.performance_metric = f.performance_metric;
    m.metric_is_list = f.metric_is_list;
    m.objects_to_transmit = f.objects_to_transmit;
  }
  if (f.roi_coding) {
    m.roi_coding = true;
    m.roi_object = f.roi_object;
    m.performance_metric = f.performance_metric;
    m.metric_is_list = f.metric_is_list;
  }
  const std::string t = plan::canonical_object(f.objects_to_transmit);
  if (t != "all" && t != "foreground") m.objects_to_transmit = f.objects_to_transmit;
  if (f.specific_bitrate_limit) {
    m.specific_bitrate_limit = true;
    m.bitrate_min = f.bitrate_min;
    m.bitrate_max = f.bitrate_max;
    m.bitrate_unit = f.bitrate_unit;
  } else if (f.encoded_size_level != defaults.encoded_size_level) {
    m.specific_bitrate_limit = false;
    m.bitrate_min.reset();
    m.bitrate_max.reset();
    m.bitrate_unit.reset();
    m.encoded_size_level = f.encoded_size_level;
  }
  if (f.specific_performance_limit) {
    m.specific_performance_limit = true;
    m.performance_min = f.performance_min;
    m.performance_max = f.performance_max;
  }
  if (!f.roi_coding && f.compression_mode == defaults.compression_mode &&
      f.performance_metric != defaults.performance_metric) {
    const bool keeps_invariant =
        !m.roi_coding || m.compression_mode != codec::TaskKind::kDistortion ||
        std::any_of(f.performance_metric.begin(), f.performance_metric.end(),
                    [](const MetricSpec& s) { return s.kind == MetricSpec::Kind::kWeightedPsnr; });
    if (keeps_invariant) {
      m.performance_metric = f.performance_metric;
      m.metric_is_list = f.metric_is_list;
    }
  }
  return plan::normalize(m);
}

Fixture load_fixture(std::string_view name) {
  const auto path = std::filesystem::path(COMPX_DATA_DIR) / "fixtures" / (std::string(name) + ".json");
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "fixture " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kCorruptFile, "fixture " + path.string() + " is not a JSON object");
  }
  try {
    Fixture f;
    f.name = std::string(name);
    f.instruction = j.at("instruction").get<std::string>();
    f.image = std::filesystem::path(COMPX_DATA_DIR) / j.at("image").get<std::string>();
    f.replies.push_back(j.at("planning").get<std::string>());
    for (const auto& r : j.at("refinement")) f.replies.push_back(r.get<std::string>());
    for (const auto& e : j.at("executions")) {
      f.executions.push_back({{e.at("q").at(0).get<double>(), e.at("q").at(1).get<double>()},
                              e.at("bytes").get<uint64_t>(), e.at("performance").get<double>()});
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, "fixture " + path.string() + ": " + e.what());
  }
}

Session::Session(Deps deps) : deps_(std::move(deps)) {
  if (deps_.image_dirs.empty()) deps_.image_dirs.push_back(default_image_dir());
  if (!deps_.executor) deps_.executor = std::make_shared<CodecExecutor>();
}

std::filesystem::path Session::segment_dir(size_t k) const {
  if (deps_.session_dir.empty()) return {};
  return k == 0 ? deps_.session_dir : deps_.session_dir / ("followup_" + std::to_string(k));
}

void Session::set_state(State s) {
  if (deps_.on_state) deps_.on_state(s);
}

void Session::progress(const SessionTrace& trace) {
  if (deps_.on_progress) deps_.on_progress(trace);
}

const prompts::PromptBundle& Session::bundle() {
  if (!deps_.bundle) {
    deps_.bundle =
        std::make_shared<const prompts::PromptBundle>(prompts::load_store(prompts::default_store_dir()));
  }
  return *deps_.bundle;
}

llm::Transport& Session::transport() {
  if (!deps_.transport) deps_.transport = std::make_shared<llm::LiveTransport>();
  return *deps_.transport;
}

const SessionTrace& Session::run(std::string_view instruction) {
  return execute(instruction, false);
}

const SessionTrace& Session::follow_up(std::string_view instruction) {
  return execute(instruction, !segments_.empty());
}

const SessionTrace& Session::execute(std::string_view instruction, bool followup) {
  segments_.emplace_back();
  SessionTrace& trace = segments_.back();
  trace.request = std::string(instruction);
  const std::filesystem::path dir = segment_dir(segments_.size() - 1);
  std::string stage = "planning";
  try {
    if (!dir.empty()) std::filesystem::create_directories(dir);
    set_state(State::kPlanning);
    if (deps_.planner != PlannerMode::kRules) {
      bundle();
      transport();
    }
    RequestPlan p = plan_stage(instruction, deps_, trace.warnings);
    if (followup) p = merge_followup(segments_[segments_.size() - 2].plan, p);
    trace.plan = p;
    trace.warnings.insert(trace.warnings.end(), p.warnings.begin(), p.warnings.end());
    trace.constraints = derive_constraints(p);
    trace.planned = true;
    if (!dir.empty()) {
      write_json(dir / "plan.json", plan::to_json(p));
      write_json(dir / "constraints.json", to_json(trace.constraints));
    }
    progress(trace);

    stage = "pre_analysis";
    set_state(State::kPreAnalysis);
    if (!image_) {
      std::filesystem::path path;
      if (deps_.image_path) {
        path = *deps_.image_path;
      } else {
        if (p.file_path.empty()) throw Error(ErrorCode::kNotFound, "request names no image");
        path = p.file_path;
        if (!std::filesystem::exists(path) && path.is_relative()) {
          for (const auto& d : deps_.image_dirs) {
            if (std::filesystem::exists(d / path)) {
              path = d / path;
              break;
            }
          }
        }
      }
      image_ = imaging::load_image(path);
      image_path_ = path;
    }
    if (needs_mask(p) && !mask_) {
      if (!deps_.mask_source) {
        throw Error(ErrorCode::kSegmentationRequired, "plan needs a mask and no source is set");
      }
      mask_ = segment::acquire_mask(*deps_.mask_source, *image_, mask_phrase(p));
      if (!deps_.session_dir.empty()) {
        imaging::save_image(mask_image(*mask_), deps_.session_dir / "mask.png");
      }
    }
    stage = "refinement";
    run_loop(trace, dir);
    set_state(State::kDone);
  } catch (const Error& e) {
    trace.error = TraceError{stage, std::string(e.name()), e.detail()};
    trace.outcome = Outcome::kFailed;
    set_state(State::kFailed);
  } catch (const std::exception& e) {
    trace.error = TraceError{stage, "Internal", e.what()};
    trace.outcome = Outcome::kFailed;
    set_state(State::kFailed);
  }
  if (!dir.empty()) {
    try {
      write_json(dir / "trace.json", to_json(trace));
    } catch (const Error&) {
      trace.warnings.push_back("could not write trace.json");
    }
  }
  progress(trace);
  return trace;
}

void Session::run_loop(SessionTrace& trace, const std::filesystem::path& dir) {
  const RequestPlan& p = trace.plan;
  const Constraints& c = trace.constraints;
  const ExecContext ctx{&*image_, mask_ ? &*mask_ : nullptr, &p, &c};
  std::array<double, 2> q = initial_q(p);
  std::string proposer = "initial";
  std::string proposal_note;
  for (int k = 0; k < kMaxIterations; ++k) {
    set_state(State::kEncoding);
    Iteration it;
    it.index = k;
    it.q_factors = q;
    it.level = (q[0] + q[1]) / 2;
    it.proposer = proposer;
    const ExecOutput out = deps_.executor->execute(ctx, q);
    it.bytes = out.bytes;
    it.metric_value = out.metric_value;
    it.note = proposal_note.empty() ? out.note
              : out.note.empty()    ? proposal_note
                                    : proposal_note + "; " + out.note;
    if (!dir.empty()) {
      const auto idir = dir / ("iter_" + std::to_string(k));
      std::filesystem::create_directories(idir);
      imaging::save_image(out.recon, idir / "recon.png");
      write_bytes(idir / "stream.ssbx", out.stream);
    }
    set_state(State::kEvaluating);
    it.verdict = c.has_window() ? evaluate_iteration(it, c) : Verdict::kAccept;
    trace.iterations.push_back(it);
    progress(trace);
    if (it.verdict == Verdict::kAccept) {
      trace.outcome = Outcome::kAccepted;
      trace.chosen_iteration = k;
      return;
    }
    if (it.verdict == Verdict::kStopBestEffort) break;

    set_state(State::kRefining);
    proposal_note.clear();
    if (deps_.proposer == ProposerKind::kLlm) {
      try {
        q = llm_propose(p, trace.iterations, c, bundle(), deps_.chat, transport());
        proposer = "llm";
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNoWindow) throw;
        trace.warnings.push_back("iteration " + std::to_string(k + 1) + ": llm proposer failed (" +
                                 std::string(e.name()) + "); used bisection");
        q = propose_next(trace.iterations, c);
        proposer = "bisection";
        proposal_note = "llm fallback";
      }
    } else {
      q = propose_next(trace.iterations, c);
      proposer = "bisection";
    }
  }
  trace.outcome = Outcome::kBestEffort;
  trace.chosen_iteration = choose_best_effort(trace.iterations, c);
}

SessionTrace run_session(std::string_view instruction, const Deps& deps) {
  Session s(deps);
  return s.run(instruction);
}

}  // namespace compx::agent
