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

#ifndef COMPX_PLAN_H_
#define COMPX_PLAN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "compx/codec.h"
#include "json.hpp"

// The request-plan schema exchanged with the planner model, its parsing and
// normalization, a deterministic keyword planner, and gold-label scoring.
namespace compx::plan {

enum class SizeLevel { kMinimum, kSmall, kMedium, kLarge, kMaximum };
enum class ByteUnit { kB, kKB, kMB };

std::string_view size_level_name(SizeLevel level);
std::string_view unit_name(ByteUnit unit);

struct MetricSpec {
  enum class Kind {
    kDistortion,
    kPerception,
    kClassification,
    kSegmentation,
    kDetection,
    kPoseEstimation,
    kPsnr,
    kWeightedPsnr,
  };
  Kind kind = Kind::kDistortion;
  // weighted_PSNR only.
  double roi_ratio = 0.0;
  double nonroi_ratio = 0.0;

  static MetricSpec weighted(double roi, double nonroi);
  static MetricSpec of_mode(codec::TaskKind mode);
  // "distortion", "PSNR", "weighted_PSNR(0.8, 0.2)", ...
  std::string to_string() const;
  // Throws InvalidEnum or RatioSumViolation.
  static MetricSpec parse(std::string_view text);
  bool computable() const { return kind == Kind::kPsnr || kind == Kind::kWeightedPsnr; }
  // Ratios compare within 1e-9 so printed and parsed forms agree.
  bool operator==(const MetricSpec& o) const;
};

struct RequestPlan {
  std::string file_path;
  codec::TaskKind compression_mode = codec::TaskKind::kDistortion;
  bool roi_coding = false;
  std::optional<std::string> roi_object;
  std::string objects_to_transmit = "all";
  SizeLevel encoded_size_level = SizeLevel::kMedium;
  bool specific_performance_limit = false;
  bool specific_bitrate_limit = false;
  // Never empty after parsing. `metric_is_list` keeps the single/list
  // distinction of the source text.
  std::vector<MetricSpec> performance_metric{MetricSpec{}};
  bool metric_is_list = false;
  std::optional<double> bitrate_min;
  std::optional<double> bitrate_max;
  std::optional<ByteUnit> bitrate_unit;
  std::optional<double> performance_min;
  std::optional<double> performance_max;
  // Notes produced by normalization; not part of the schema.
  std::vector<std::string> warnings;

  bool operator==(const RequestPlan& o) const;
};

using GoldLabel = RequestPlan;

// Schema JSON with the interchange key names ("RoI_coding", ...).
nlohmann::ordered_json to_json(const RequestPlan& plan);
std::string to_schema_text(const RequestPlan& plan);

enum class ParseMode { kLenient, kStrict };

// Accepts raw model output: code fences, surrounding prose, Python-style
// literals (single quotes, True/False/None). Keys match case-insensitively.
// Errors: NoJsonFound, UnknownField (strict), InvalidEnum, RatioSumViolation.
RequestPlan parse_plan_text(std::string_view text, ParseMode mode = ParseMode::kLenient);
RequestPlan plan_from_json(const nlohmann::json& object, ParseMode mode = ParseMode::kLenient);

// A bitrate limit forces the medium size level; roi_object is cleared when
// RoI coding is off. Idempotent. Throws InvariantViolation.
RequestPlan normalize(RequestPlan plan);

// Lowercased, trimmed object phrase with synonyms folded ("people" ->
// "person", "foreground objects" -> "foreground").
std::string canonical_object(std::string_view phrase);

// SI units: KB = 1000 B. Throws NonPositive.
uint64_t size_to_bytes(double value, ByteUnit unit);

// Deterministic keyword planner; always returns a normalized plan.
RequestPlan rule_parse(std::string_view instruction);

struct FieldReport {
  struct Field {
    std::string name;
    bool match = false;
    std::string predicted;
    std::string expected;
  };
  std::vector<Field> fields;
  bool success = false;

  size_t failures() const;
};

FieldReport score(const RequestPlan& predicted, const GoldLabel& gold);

enum class Difficulty { kSimple, kHard };

struct ItemRuns {
  std::string id;
  Difficulty difficulty = Difficulty::kSimple;
  std::vector<bool> successes;  // one entry per repeat
};

struct SuccessReport {
  double simple_pct = 0.0;
  double hard_pct = 0.0;
  double all_pct = 0.0;
  size_t simple_items = 0;
  size_t hard_items = 0;
};

// Per-item rate = successes / repeats; difficulty columns average items of
// that difficulty; `all` averages every item. Throws MissingRuns.
SuccessReport aggregate(const std::vector<ItemRuns>& items, int repeats);

// Item-weighted combination of two column percentages.
double combine_pct(double simple_pct, size_t simple_items, double hard_pct,
                   size_t hard_items);

}  // namespace compx::plan

#endif  // COMPX_PLAN_H_
