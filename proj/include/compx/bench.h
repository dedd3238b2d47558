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


#ifndef COMPX_BENCH_H_
#define COMPX_BENCH_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <string>
#include <vector>

#include "compx/agent.h"
#include "compx/codec.h"
#include "compx/metrics.h"
#include "compx/plan.h"

// Planning success-rate evaluation and rate-distortion sweeps.
namespace compx::bench {

struct BenchItem {
  std::string id;
  plan::Difficulty difficulty = plan::Difficulty::kSimple;
  std::string instruction;
  plan::GoldLabel gold;
};

// JSONL, one {id, difficulty, instruction, label} object per line; blank
// lines are skipped. Errors: NotFound, DuplicateId, BadDifficulty,
// LabelParseError (messages carry the 1-based line number).
std::vector<BenchItem> load_suite(const std::filesystem::path& path);
std::filesystem::path default_suite_path();

struct ItemFailure {
  std::string id;
  int repeat = 0;
  // Error code name when planning threw, else empty.
  std::string error;
  std::vector<plan::FieldReport::Field> diffs;
};

struct BenchReport {
  std::string planner;
  int repeats = 0;
  std::vector<plan::ItemRuns> items;
  plan::SuccessReport summary;
  std::vector<ItemFailure> failures;
};

// Items run in suite order, repeats innermost, so a scripted transport is
// consumed predictably. Planning errors count as failed repeats.
// Throws InvariantViolation on an empty suite or repeats < 1.
BenchReport run_success_eval(const std::vector<BenchItem>& suite, const agent::Deps& deps,
                             int repeats = 3);

struct RdSample {
  double q = 0.0;
  uint64_t bytes = 0;
  double bpp = 0.0;
  double psnr = 0.0;
};

struct RdCurve {
  std::string image;
  std::vector<RdSample> samples;
  std::vector<metrics::RdPoint> points() const;
};

// Uniform quality maps over `q_grid` (strictly increasing, at least 4
// values, else InvariantViolation). Each curve must have strictly increasing
// bpp and PSNR nondecreasing within 0.1 dB, else CurveNonMonotone.
std::vector<RdCurve> rd_sweep(const std::vector<std::filesystem::path>& images,
                              const std::vector<double>& q_grid,
                              codec::TaskKind profile = codec::TaskKind::kDistortion);
RdCurve rd_sweep_image(const std::string& name, const imaging::ImageBuffer& image,
                       const std::vector<double>& q_grid,
                       codec::TaskKind profile = codec::TaskKind::kDistortion);

enum class Format { kCsv, kMarkdown, kJson };
std::optional<Format> parse_format(std::string_view name);

std::string render(const BenchReport& report, Format format);
std::string render(const std::vector<RdCurve>& curves, Format format);
// Throws IoError.
void write_report(const std::string& content, const std::filesystem::path& path);

// Percentage with two decimals.
std::string pct(double value);

}  // namespace compx::bench

#endif  // COMPX_BENCH_H_
