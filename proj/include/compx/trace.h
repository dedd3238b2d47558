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

#ifndef COMPX_TRACE_H_
#define COMPX_TRACE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compx/plan.h"
#include "json.hpp"

// Records of one refinement session: the acceptance windows derived from a
// plan, every codec iteration, and the final outcome.
namespace compx::agent {

inline constexpr int kMaxIterations = 10;

// Inclusive interval.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Window&) const = default;
};

struct Constraints {
  std::optional<Window> byte_window;
  std::optional<Window> perf_window;
  plan::MetricSpec gate_metric;
  // Set when the plan names a task metric that PSNR stands in for.
  std::optional<plan::MetricSpec> proxied_metric;

  bool has_window() const { return byte_window || perf_window; }
};

enum class Verdict { kAccept, kContinue, kStopBestEffort };
enum class Outcome { kAccepted, kBestEffort, kFailed };

std::string_view verdict_name(Verdict v);
std::string_view outcome_name(Outcome o);

struct Iteration {
  int index = 0;
  std::array<double, 2> q_factors{0.5, 0.5};  // RoI, non-RoI
  double level = 0.5;                          // scalar s searched by bisection
  uint64_t bytes = 0;
  double metric_value = 0.0;
  std::string proposer;  // "initial", "bisection", "llm"
  std::string note;
  Verdict verdict = Verdict::kContinue;
};

struct TraceError {
  std::string stage;
  std::string code;
  std::string message;
};

struct SessionTrace {
  std::string request;
  plan::RequestPlan plan;
  bool planned = false;
  Constraints constraints;
  std::vector<Iteration> iterations;
  std::optional<Outcome> outcome;
  std::optional<int> chosen_iteration;
  std::vector<std::string> warnings;
  std::optional<TraceError> error;
};

// Serialized windows are [lo, hi] arrays; infinite metric values render as
// the string "inf".
nlohmann::ordered_json to_json(const Constraints& c);
nlohmann::ordered_json to_json(const Iteration& it);
nlohmann::ordered_json to_json(const SessionTrace& trace);

}  // namespace compx::agent

#endif  // COMPX_TRACE_H_
