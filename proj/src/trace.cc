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

#include "compx/trace.h"

#include <cmath>

namespace compx::agent {

using nlohmann::ordered_json;

namespace {

ordered_json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ordered_json window(const std::optional<Window>& w) {
  if (!w) return nullptr;
  return ordered_json::array({number(w->lo), number(w->hi)});
}

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kAccept: return "accept";
    case Verdict::kContinue: return "continue";
    case Verdict::kStopBestEffort: return "stop_best_effort";
  }
  return "continue";
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kAccepted: return "accepted";
    case Outcome::kBestEffort: return "best_effort";
    case Outcome::kFailed: return "failed";
  }
  return "failed";
}

ordered_json to_json(const Constraints& c) {
  ordered_json j;
  j["byte_window"] = window(c.byte_window);
  j["perf_window"] = window(c.perf_window);
  j["gate_metric"] = c.gate_metric.to_string();
  j["proxied_metric"] = c.proxied_metric ? ordered_json(c.proxied_metric->to_string())
                                         : ordered_json(nullptr);
  return j;
}

ordered_json to_json(const Iteration& it) {
  ordered_json j;
  j["index"] = it.index;
  j["q_factors"] = ordered_json::array({it.q_factors[0], it.q_factors[1]});
  j["level"] = it.level;
  j["bytes"] = it.bytes;
  j["metric_value"] = number(it.metric_value);
  j["verdict"] = verdict_name(it.verdict);
  j["proposer"] = it.proposer;
  j["note"] = it.note;
  return j;
}

ordered_json to_json(const SessionTrace& t) {
  ordered_json j;
  j["request"] = t.request;
  j["plan"] = t.planned ? plan::to_json(t.plan) : ordered_json(nullptr);
  j["constraints"] = t.planned ? to_json(t.constraints) : ordered_json(nullptr);
  ordered_json iters = ordered_json::array();
  for (const auto& it : t.iterations) iters.push_back(to_json(it));
  j["iterations"] = iters;
  j["outcome"] = t.outcome ? ordered_json(outcome_name(*t.outcome)) : ordered_json(nullptr);
  j["chosen_iteration"] = t.chosen_iteration ? ordered_json(*t.chosen_iteration)
                                             : ordered_json(nullptr);
  j["warnings"] = t.warnings;
  if (t.error) {
    j["error"] = {{"stage", t.error->stage}, {"code", t.error->code},
                  {"message", t.error->message}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

}  // namespace compx::agent
