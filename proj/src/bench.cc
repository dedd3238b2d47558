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


#include "compx/bench.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "compx/container.h"
#include "compx/error.h"
#include "compx/metrics.h"
#include "text_util.h"

namespace compx::bench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string difficulty_name(plan::Difficulty d) {
  return d == plan::Difficulty::kSimple ? "simple" : "hard";
}

int success_count(const plan::ItemRuns& r) {
  int n = 0;
  for (bool s : r.successes) n += s;
  return n;
}

}  // namespace

std::string pct(double value) { return fixed(value, 2); }

std::filesystem::path default_suite_path() {
  return std::filesystem::path(COMPX_DATA_DIR) / "bench" / "mini_suite.jsonl";
}

std::vector<BenchItem> load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, path.string());
  std::vector<BenchItem> out;
  std::set<std::string> ids;
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    if (text::trim(line).empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(no);
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kLabelParseError, where + ": not a JSON object");
    }
    BenchItem item;
    if (!j.contains("id") || !j["id"].is_string() || !j.contains("instruction") ||
        !j["instruction"].is_string()) {
      throw Error(ErrorCode::kLabelParseError, where + ": needs string id and instruction");
    }
    item.id = j["id"].get<std::string>();
    item.instruction = j["instruction"].get<std::string>();
    const std::string diff = j.value("difficulty", std::string());
    if (diff == "simple") {
      item.difficulty = plan::Difficulty::kSimple;
    } else if (diff == "hard") {
      item.difficulty = plan::Difficulty::kHard;
    } else {
      throw Error(ErrorCode::kBadDifficulty, where + ": '" + diff + "'");
    }
    if (!ids.insert(item.id).second) throw Error(ErrorCode::kDuplicateId, where + ": " + item.id);
    if (!j.contains("label")) throw Error(ErrorCode::kLabelParseError, where + ": missing label");
    try {
      item.gold = plan::normalize(plan::plan_from_json(j["label"]));
    } catch (const Error& e) {
      throw Error(ErrorCode::kLabelParseError, where + ": " + e.what());
    }
    out.push_back(std::move(item));
  }
  return out;
}

BenchReport run_success_eval(const std::vector<BenchItem>& suite, const agent::Deps& deps,
                             int repeats) {
  if (suite.empty()) throw Error(ErrorCode::kInvariantViolation, "empty suite");
  if (repeats < 1) throw Error(ErrorCode::kInvariantViolation, "repeats must be >= 1");
  BenchReport report;
  report.planner = std::string(agent::planner_mode_name(deps.planner));
  report.repeats = repeats;
  for (const BenchItem& item : suite) {
    plan::ItemRuns runs{item.id, item.difficulty, {}};
    for (int r = 0; r < repeats; ++r) {
      std::vector<std::string> warnings;
      try {
        const plan::FieldReport fr =
            plan::score(agent::plan_stage(item.instruction, deps, warnings), item.gold);
        runs.successes.push_back(fr.success);
        if (!fr.success) {
          ItemFailure f{item.id, r, "", {}};
          for (const auto& field : fr.fields) {
            if (!field.match) f.diffs.push_back(field);
          }
          report.failures.push_back(std::move(f));
        }
      } catch (const Error& e) {
        runs.successes.push_back(false);
        report.failures.push_back({item.id, r, std::string(e.name()), {}});
      }
    }
    report.items.push_back(std::move(runs));
  }
  report.summary = plan::aggregate(report.items, repeats);
  return report;
}

std::vector<metrics::RdPoint> RdCurve::points() const {
  std::vector<metrics::RdPoint> out;
  for (const auto& s : samples) out.push_back({s.bpp, s.psnr});
  return out;
}

RdCurve rd_sweep_image(const std::string& name, const imaging::ImageBuffer& image,
                       const std::vector<double>& q_grid, codec::TaskKind profile) {
  if (q_grid.size() < 4) throw Error(ErrorCode::kInvariantViolation, "q grid needs >= 4 points");
  for (size_t i = 0; i < q_grid.size(); ++i) {
    if (q_grid[i] < 0.0 || q_grid[i] > 1.0 || (i > 0 && q_grid[i] <= q_grid[i - 1])) {
      throw Error(ErrorCode::kInvariantViolation, "q grid must increase strictly within [0, 1]");
    }
  }
  RdCurve curve{name, {}};
  const codec::GroupMask whole(image.width(), image.height());
  for (double q : q_grid) {
    const auto c = codec::encode(image,
                                 codec::QualityMap(image.width(), image.height(), static_cast<float>(q)),
                                 whole, codec::TaskProfile::for_kind(profile));
    RdSample s;
    s.q = q;
    s.bytes = container::serialized_size(c);
    s.bpp = metrics::bpp_of_bytes(s.bytes, image.width(), image.height());
    s.psnr = metrics::psnr(image, codec::decode(c));
    curve.samples.push_back(s);
  }
  for (size_t i = 1; i < curve.samples.size(); ++i) {
    const auto& a = curve.samples[i - 1];
    const auto& b = curve.samples[i];
    if (!(b.bpp > a.bpp) || b.psnr < a.psnr - metrics::kCurveSlackDb) {
      throw Error(ErrorCode::kCurveNonMonotone,
                  name + ": q=" + text::format_number(a.q) + " (" + fixed(a.bpp, 4) + " bpp, " +
                      metrics::format_db(a.psnr) + " dB) -> q=" + text::format_number(b.q) + " (" +
                      fixed(b.bpp, 4) + " bpp, " + metrics::format_db(b.psnr) + " dB)");
    }
  }
  return curve;
}

std::vector<RdCurve> rd_sweep(const std::vector<std::filesystem::path>& images,
                              const std::vector<double>& q_grid, codec::TaskKind profile) {
  std::vector<RdCurve> out;
  for (const auto& p : images) {
    out.push_back(rd_sweep_image(p.filename().string(), imaging::load_image(p), q_grid, profile));
  }
  return out;
}

std::optional<Format> parse_format(std::string_view name) {
  if (name == "csv") return Format::kCsv;
  if (name == "markdown" || name == "md") return Format::kMarkdown;
  if (name == "json") return Format::kJson;
  return std::nullopt;
}

std::string render(const BenchReport& r, Format format) {
  std::ostringstream s;
  switch (format) {
    case Format::kCsv:
      s << "id,difficulty,successes,repeats,rate_pct\n";
      for (const auto& it : r.items) {
        s << it.id << "," << difficulty_name(it.difficulty) << "," << success_count(it) << ","
          << r.repeats << "," << pct(100.0 * success_count(it) / r.repeats) << "\n";
      }
      s << "summary,simple,,," << pct(r.summary.simple_pct) << "\n";
      s << "summary,hard,,," << pct(r.summary.hard_pct) << "\n";
      s << "summary,all,,," << pct(r.summary.all_pct) << "\n";
      break;
    case Format::kMarkdown:
      s << "| Planner | Simple (%) | Hard (%) | All (%) |\n";
      s << "|---|---|---|---|\n";
      s << "| " << r.planner << " | " << pct(r.summary.simple_pct) << " | "
        << pct(r.summary.hard_pct) << " | " << pct(r.summary.all_pct) << " |\n";
      s << "\n" << r.summary.simple_items << " simple and " << r.summary.hard_items
        << " hard items, " << r.repeats << " repeat(s) each.\n";
      if (!r.failures.empty()) {
        s << "\n| Item | Repeat | Field | Predicted | Expected |\n|---|---|---|---|---|\n";
        for (const auto& f : r.failures) {
          if (!f.error.empty()) {
            s << "| " << f.id << " | " << f.repeat << " | error | " << f.error << " | |\n";
          }
          for (const auto& d : f.diffs) {
            s << "| " << f.id << " | " << f.repeat << " | " << d.name << " | " << d.predicted
              << " | " << d.expected << " |\n";
          }
        }
      }
      break;
    case Format::kJson: {
      ordered_json j;
      j["planner"] = r.planner;
      j["repeats"] = r.repeats;
      j["simple_pct"] = std::stod(pct(r.summary.simple_pct));
      j["hard_pct"] = std::stod(pct(r.summary.hard_pct));
      j["all_pct"] = std::stod(pct(r.summary.all_pct));
      ordered_json items = ordered_json::array();
      for (const auto& it : r.items) {
        items.push_back({{"id", it.id},
                         {"difficulty", difficulty_name(it.difficulty)},
                         {"successes", it.successes}});
      }
      j["items"] = items;
      ordered_json fails = ordered_json::array();
      for (const auto& f : r.failures) {
        ordered_json diffs = ordered_json::array();
        for (const auto& d : f.diffs) {
          diffs.push_back({{"field", d.name}, {"predicted", d.predicted}, {"expected", d.expected}});
        }
        fails.push_back({{"id", f.id}, {"repeat", f.repeat}, {"error", f.error}, {"diffs", diffs}});
      }
      j["failures"] = fails;
      s << j.dump(2) << "\n";
      break;
    }
  }
  return s.str();
}

std::string render(const std::vector<RdCurve>& curves, Format format) {
  std::ostringstream s;
  switch (format) {
    case Format::kCsv:
      s << "image,q,bpp,psnr\n";
      for (const auto& c : curves) {
        for (const auto& p : c.samples) {
          s << c.image << "," << text::format_number(p.q) << "," << fixed(p.bpp, 6) << ","
            << metrics::format_db(p.psnr) << "\n";
        }
      }
      break;
    case Format::kMarkdown:
      s << "| Image | q | Bytes | bpp | PSNR (dB) |\n|---|---|---|---|---|\n";
      for (const auto& c : curves) {
        for (const auto& p : c.samples) {
          s << "| " << c.image << " | " << text::format_number(p.q) << " | " << p.bytes << " | "
            << fixed(p.bpp, 4) << " | " << metrics::format_db(p.psnr, 2) << " |\n";
        }
      }
      break;
    case Format::kJson: {
      ordered_json j = ordered_json::array();
      for (const auto& c : curves) {
        ordered_json pts = ordered_json::array();
        for (const auto& p : c.samples) {
          pts.push_back({{"q", p.q}, {"bytes", p.bytes}, {"bpp", p.bpp},
                         {"psnr", std::isinf(p.psnr) ? ordered_json("inf") : ordered_json(p.psnr)}});
        }
        j.push_back({{"image", c.image}, {"samples", pts}});
      }
      s << j.dump(2) << "\n";
      break;
    }
  }
  return s.str();
}

void write_report(const std::string& content, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

}  // namespace compx::bench
