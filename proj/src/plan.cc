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

#include "compx/plan.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>

#include "compx/error.h"
#include "text_util.h"

namespace compx::plan {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using text::format_number;
using text::lower;
using text::trim;

constexpr double kRatioTolerance = 1e-6;

codec::TaskKind parse_mode(std::string_view raw) {
  std::string s = lower(trim(raw));
  std::replace(s.begin(), s.end(), ' ', '_');
  std::replace(s.begin(), s.end(), '-', '_');
  if (auto kind = codec::parse_task(s)) return *kind;
  throw Error(ErrorCode::kInvalidEnum, "compression_mode '" + std::string(raw) + "'");
}

SizeLevel parse_size_level(std::string_view raw) {
  const std::string s = lower(trim(raw));
  if (s == "minimum") return SizeLevel::kMinimum;
  if (s == "small") return SizeLevel::kSmall;
  if (s == "medium") return SizeLevel::kMedium;
  if (s == "large") return SizeLevel::kLarge;
  if (s == "maximum") return SizeLevel::kMaximum;
  throw Error(ErrorCode::kInvalidEnum, "encoded_size_level '" + std::string(raw) + "'");
}

ByteUnit parse_unit(std::string_view raw) {
  const std::string s = lower(trim(raw));
  if (s == "b" || s == "byte" || s == "bytes") return ByteUnit::kB;
  if (s == "kb" || s == "kilobyte" || s == "kilobytes") return ByteUnit::kKB;
  if (s == "mb" || s == "megabyte" || s == "megabytes") return ByteUnit::kMB;
  throw Error(ErrorCode::kInvalidEnum, "bitrate_unit '" + std::string(raw) + "'");
}

bool is_null_word(std::string_view s) {
  const std::string l = lower(trim(s));
  return l.empty() || l == "null" || l == "none";
}

bool json_bool(const json& v, const std::string& key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = lower(trim(v.get<std::string>()));
    if (s == "true") return true;
    if (s == "false") return false;
  }
  if (v.is_null()) return false;
  throw Error(ErrorCode::kInvalidEnum, key + " must be true or false");
}

std::optional<double> json_number(const json& v, const std::string& key) {
  if (v.is_null()) return std::nullopt;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = trim(v.get<std::string>());
    if (is_null_word(s)) return std::nullopt;
    try {
      size_t used = 0;
      const double d = std::stod(s, &used);
      if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kInvalidEnum, key + " must be a number or null");
}

std::optional<std::string> json_opt_string(const json& v) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) {
    if (is_null_word(v.get<std::string>())) return std::nullopt;
    return trim(v.get<std::string>());
  }
  if (v.is_array()) {
    std::string joined;
    for (const auto& e : v) {
      if (!e.is_string()) continue;
      if (!joined.empty()) joined += ", ";
      joined += trim(e.get<std::string>());
    }
    return joined.empty() ? std::nullopt : std::optional(joined);
  }
  return v.dump();
}

// Rewrites Python-literal dict output into JSON: single-quoted strings
// become double-quoted, bare True/False/None become JSON literals and
// trailing commas are dropped.
std::string pythonic_to_json(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  size_t i = 0;
  while (i < in.size()) {
    const char c = in[i];
    if (c == '"' || c == '\'') {
      const char quote = c;
      out += '"';
      ++i;
      while (i < in.size() && in[i] != quote) {
        if (in[i] == '\\' && i + 1 < in.size()) {
          if (quote == '\'' && in[i + 1] == '\'') {
            out += '\'';
          } else {
            out += in[i];
            out += in[i + 1];
          }
          i += 2;
          continue;
        }
        if (quote == '\'' && in[i] == '"') {
          out += "\\\"";
        } else {
          out += in[i];
        }
        ++i;
      }
      out += '"';
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < in.size() && (std::isalnum(static_cast<unsigned char>(in[j])) || in[j] == '_')) ++j;
      const std::string_view word = in.substr(i, j - i);
      if (word == "True") out += "true";
      else if (word == "False") out += "false";
      else if (word == "None") out += "null";
      else out += word;
      i = j;
      continue;
    }
    if (c == ',') {
      size_t j = i + 1;
      while (j < in.size() && std::isspace(static_cast<unsigned char>(in[j]))) ++j;
      if (j < in.size() && (in[j] == '}' || in[j] == ']')) {
        ++i;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return out;
}

// Balanced {...} span opening at `start`, skipping braces inside quoted
// strings.
std::optional<std::string_view> balanced_object(std::string_view s, size_t start) {
  int depth = 0;
  char quote = 0;
  for (size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      // An apostrophe inside a bare word is prose, not a string.
      if (c == '\'' && i > 0 && std::isalpha(static_cast<unsigned char>(s[i - 1]))) continue;
      quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return s.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

std::string_view strip_fences(std::string_view s) {
  const size_t open = s.find("```");
  if (open == std::string_view::npos) return s;
  size_t body = s.find('\n', open);
  if (body == std::string_view::npos) body = open + 3;
  const size_t close = s.find("```", body);
  if (close == std::string_view::npos) return s.substr(body);
  return s.substr(body, close - body);
}

// Canonical schema keys, matched after lowercasing.
enum class Field {
  kFilePath, kMode, kRoiCoding, kRoiObject, kTransmit, kSizeLevel,
  kPerfLimit, kBitrateLimit, kMetric, kBitrateMin, kBitrateMax, kBitrateUnit,
  kPerfMin, kPerfMax,
};

const std::map<std::string, Field>& field_keys() {
  static const std::map<std::string, Field> keys = {
      {"file_path", Field::kFilePath},
      {"compression_mode", Field::kMode},
      {"roi_coding", Field::kRoiCoding},
      {"roi_object", Field::kRoiObject},
      {"object_needed_to_be_transmitted", Field::kTransmit},
      {"objects_needed_to_be_transmitted", Field::kTransmit},
      {"objects_to_transmit", Field::kTransmit},
      {"encoded_size_level", Field::kSizeLevel},
      {"specific_performance_limit", Field::kPerfLimit},
      {"specific_bitrate_limit", Field::kBitrateLimit},
      {"performance_metric", Field::kMetric},
      {"bitrate_min", Field::kBitrateMin},
      {"bitrate_max", Field::kBitrateMax},
      {"bitrate_unit", Field::kBitrateUnit},
      {"performance_min", Field::kPerfMin},
      {"performance_max", Field::kPerfMax},
  };
  return keys;
}

const std::map<std::string, std::string>& synonyms() {
  static const std::map<std::string, std::string> table = {
      {"people", "person"},
      {"persons", "person"},
      {"human", "person"},
      {"humans", "person"},
      {"foreground objects", "foreground"},
      {"foreground object", "foreground"},
      {"vehicle", "vehicles"},
  };
  return table;
}

std::string canonical_text(std::string_view s) {
  std::string t = lower(trim(s));
  if (auto it = synonyms().find(t); it != synonyms().end()) return it->second;
  return t;
}

}  // namespace

std::string canonical_object(std::string_view phrase) { return canonical_text(phrase); }

std::string_view size_level_name(SizeLevel level) {
  switch (level) {
    case SizeLevel::kMinimum: return "minimum";
    case SizeLevel::kSmall: return "small";
    case SizeLevel::kMedium: return "medium";
    case SizeLevel::kLarge: return "large";
    case SizeLevel::kMaximum: return "maximum";
  }
  return "medium";
}

std::string_view unit_name(ByteUnit unit) {
  switch (unit) {
    case ByteUnit::kB: return "B";
    case ByteUnit::kKB: return "KB";
    case ByteUnit::kMB: return "MB";
  }
  return "B";
}

MetricSpec MetricSpec::weighted(double roi, double nonroi) {
  if (!(roi >= 0.0) || !(nonroi >= 0.0) ||
      std::abs(roi + nonroi - 1.0) > kRatioTolerance) {
    throw Error(ErrorCode::kRatioSumViolation,
                "weighted_PSNR ratios " + format_number(roi) + " and " +
                    format_number(nonroi) + " must be >= 0 and sum to 1");
  }
  MetricSpec m;
  m.kind = Kind::kWeightedPsnr;
  m.roi_ratio = roi;
  m.nonroi_ratio = nonroi;
  return m;
}

MetricSpec MetricSpec::of_mode(codec::TaskKind mode) {
  MetricSpec m;
  m.kind = static_cast<Kind>(static_cast<int>(mode));
  return m;
}

std::string MetricSpec::to_string() const {
  switch (kind) {
    case Kind::kPsnr: return "PSNR";
    case Kind::kWeightedPsnr:
      return "weighted_PSNR(" + format_number(roi_ratio) + ", " +
             format_number(nonroi_ratio) + ")";
    default:
      return std::string(codec::task_name(static_cast<codec::TaskKind>(static_cast<int>(kind))));
  }
}

MetricSpec MetricSpec::parse(std::string_view raw) {
  const std::string s = lower(trim(raw));
  static const std::regex weighted_re(
      R"(^weighted[_ ]psnr\s*\(\s*([0-9]*\.?[0-9]+)\s*,\s*([0-9]*\.?[0-9]+)\s*\)$)");
  std::smatch m;
  if (std::regex_match(s, m, weighted_re)) {
    return weighted(std::stod(m[1].str()), std::stod(m[2].str()));
  }
  if (s == "weighted_psnr" || s == "weighted psnr") return weighted(0.8, 0.2);
  if (s == "psnr") {
    MetricSpec spec;
    spec.kind = Kind::kPsnr;
    return spec;
  }
  std::string mode = s;
  std::replace(mode.begin(), mode.end(), ' ', '_');
  if (auto kind = codec::parse_task(mode)) return of_mode(*kind);
  throw Error(ErrorCode::kInvalidEnum, "performance_metric '" + std::string(raw) + "'");
}

bool MetricSpec::operator==(const MetricSpec& o) const {
  return kind == o.kind && std::abs(roi_ratio - o.roi_ratio) <= 1e-9 &&
         std::abs(nonroi_ratio - o.nonroi_ratio) <= 1e-9;
}

bool RequestPlan::operator==(const RequestPlan& o) const {
  return file_path == o.file_path && compression_mode == o.compression_mode &&
         roi_coding == o.roi_coding && roi_object == o.roi_object &&
         objects_to_transmit == o.objects_to_transmit &&
         encoded_size_level == o.encoded_size_level &&
         specific_performance_limit == o.specific_performance_limit &&
         specific_bitrate_limit == o.specific_bitrate_limit &&
         performance_metric == o.performance_metric &&
         metric_is_list == o.metric_is_list && bitrate_min == o.bitrate_min &&
         bitrate_max == o.bitrate_max && bitrate_unit == o.bitrate_unit &&
         performance_min == o.performance_min &&
         performance_max == o.performance_max;
}

ordered_json to_json(const RequestPlan& p) {
  auto opt_num = [](const std::optional<double>& v) -> ordered_json {
    if (!v) return nullptr;
    if (std::abs(*v) < 1e15 && *v == std::trunc(*v)) return static_cast<int64_t>(*v);
    return *v;
  };
  ordered_json j;
  j["file_path"] = p.file_path;
  j["compression_mode"] = codec::task_name(p.compression_mode);
  j["RoI_coding"] = p.roi_coding;
  j["RoI_object"] = p.roi_object ? ordered_json(*p.roi_object) : ordered_json(nullptr);
  j["Object_needed_to_be_transmitted"] = p.objects_to_transmit;
  j["encoded_size_level"] = size_level_name(p.encoded_size_level);
  j["specific_performance_limit"] = p.specific_performance_limit;
  j["specific_bitrate_limit"] = p.specific_bitrate_limit;
  if (p.metric_is_list || p.performance_metric.size() != 1) {
    ordered_json list = ordered_json::array();
    for (const auto& m : p.performance_metric) list.push_back(m.to_string());
    j["performance_metric"] = list;
  } else {
    j["performance_metric"] = p.performance_metric.front().to_string();
  }
  j["bitrate_min"] = opt_num(p.bitrate_min);
  j["bitrate_max"] = opt_num(p.bitrate_max);
  j["bitrate_unit"] =
      p.bitrate_unit ? ordered_json(unit_name(*p.bitrate_unit)) : ordered_json(nullptr);
  j["performance_min"] = opt_num(p.performance_min);
  j["performance_max"] = opt_num(p.performance_max);
  return j;
}

std::string to_schema_text(const RequestPlan& plan) { return to_json(plan).dump(2); }

RequestPlan plan_from_json(const json& object, ParseMode mode) {
  if (!object.is_object()) throw Error(ErrorCode::kNoJsonFound, "plan is not a JSON object");
  RequestPlan p;
  for (const auto& [raw_key, value] : object.items()) {
    const auto it = field_keys().find(lower(trim(raw_key)));
    if (it == field_keys().end()) {
      if (mode == ParseMode::kStrict) throw Error(ErrorCode::kUnknownField, raw_key);
      continue;
    }
    switch (it->second) {
      case Field::kFilePath:
        p.file_path = value.is_string() ? trim(value.get<std::string>()) : "";
        break;
      case Field::kMode:
        if (!value.is_string()) throw Error(ErrorCode::kInvalidEnum, "compression_mode");
        p.compression_mode = parse_mode(value.get<std::string>());
        break;
      case Field::kRoiCoding:
        p.roi_coding = json_bool(value, raw_key);
        break;
      case Field::kRoiObject:
        p.roi_object = json_opt_string(value);
        break;
      case Field::kTransmit: {
        auto s = json_opt_string(value);
        p.objects_to_transmit = s ? *s : "all";
        break;
      }
      case Field::kSizeLevel:
        if (!value.is_string()) throw Error(ErrorCode::kInvalidEnum, "encoded_size_level");
        p.encoded_size_level = parse_size_level(value.get<std::string>());
        break;
      case Field::kPerfLimit:
        p.specific_performance_limit = json_bool(value, raw_key);
        break;
      case Field::kBitrateLimit:
        p.specific_bitrate_limit = json_bool(value, raw_key);
        break;
      case Field::kMetric:
        p.performance_metric.clear();
        if (value.is_array()) {
          p.metric_is_list = true;
          for (const auto& e : value) {
            if (!e.is_string()) throw Error(ErrorCode::kInvalidEnum, "performance_metric entry");
            p.performance_metric.push_back(MetricSpec::parse(e.get<std::string>()));
          }
        } else if (value.is_string()) {
          p.performance_metric.push_back(MetricSpec::parse(value.get<std::string>()));
        }
        if (p.performance_metric.empty()) {
          p.metric_is_list = false;
          p.performance_metric.push_back(MetricSpec{});
        }
        break;
      case Field::kBitrateMin:
        p.bitrate_min = json_number(value, raw_key);
        break;
      case Field::kBitrateMax:
        p.bitrate_max = json_number(value, raw_key);
        break;
      case Field::kBitrateUnit:
        if (value.is_null() || (value.is_string() && is_null_word(value.get<std::string>()))) {
          p.bitrate_unit.reset();
        } else if (value.is_string()) {
          p.bitrate_unit = parse_unit(value.get<std::string>());
        } else {
          throw Error(ErrorCode::kInvalidEnum, "bitrate_unit");
        }
        break;
      case Field::kPerfMin:
        p.performance_min = json_number(value, raw_key);
        break;
      case Field::kPerfMax:
        p.performance_max = json_number(value, raw_key);
        break;
    }
  }
  return p;
}

RequestPlan parse_plan_text(std::string_view text, ParseMode mode) {
  // Prose may contain stray braces; take the first outermost object that
  // parses.
  const std::string_view body = strip_fences(text);
  size_t start = body.find('{');
  while (start != std::string_view::npos) {
    if (const auto object = balanced_object(body, start)) {
      json parsed = json::parse(pythonic_to_json(*object), nullptr, false);
      if (!parsed.is_discarded() && parsed.is_object()) return plan_from_json(parsed, mode);
    }
    start = body.find('{', start + 1);
  }
  throw Error(ErrorCode::kNoJsonFound, "no JSON object in model output");
}

RequestPlan normalize(RequestPlan p) {
  p.objects_to_transmit = trim(p.objects_to_transmit);
  if (p.objects_to_transmit.empty()) p.objects_to_transmit = "all";
  if (p.roi_object) {
    *p.roi_object = trim(*p.roi_object);
    if (is_null_word(*p.roi_object)) p.roi_object.reset();
  }
  if (!p.roi_coding && p.roi_object) {
    p.warnings.push_back("RoI_object '" + *p.roi_object +
                         "' cleared because RoI_coding is false");
    p.roi_object.reset();
  }
  if (p.specific_bitrate_limit) {
    if (!p.bitrate_max || !p.bitrate_unit) {
      throw Error(ErrorCode::kInvariantViolation,
                  "specific_bitrate_limit needs bitrate_max and bitrate_unit");
    }
    if (p.encoded_size_level != SizeLevel::kMedium) {
      p.warnings.push_back("encoded_size_level set to medium under a bitrate limit");
      p.encoded_size_level = SizeLevel::kMedium;
    }
  }
  if (p.roi_coding && p.compression_mode == codec::TaskKind::kDistortion) {
    const bool has_weighted = std::any_of(
        p.performance_metric.begin(), p.performance_metric.end(),
        [](const MetricSpec& m) { return m.kind == MetricSpec::Kind::kWeightedPsnr; });
    if (!has_weighted) {
      throw Error(ErrorCode::kInvariantViolation,
                  "RoI coding in distortion mode needs a weighted_PSNR metric");
    }
  }
  if (p.performance_metric.empty()) p.performance_metric.push_back(MetricSpec{});
  return p;
}

uint64_t size_to_bytes(double value, ByteUnit unit) {
  if (!(value > 0.0)) throw Error(ErrorCode::kNonPositive, "size must be positive");
  double scale = 1.0;
  if (unit == ByteUnit::kKB) scale = 1e3;
  if (unit == ByteUnit::kMB) scale = 1e6;
  return static_cast<uint64_t>(std::llround(value * scale));
}

namespace {

std::optional<std::string> search(const std::string& text, const std::regex& re, int group = 1) {
  std::smatch m;
  if (std::regex_search(text, m, re)) return m[group].str();
  return std::nullopt;
}

bool contains(const std::string& text, const std::regex& re) {
  return std::regex_search(text, re);
}

// Drops leading determiners and folds "foreground object(s)" to "foreground".
std::string clean_object(std::string x) {
  static const std::regex lead(R"(^(?:(?:the|all|a|an|my|our|its|any)\s+)+)");
  x = trim(std::regex_replace(x, lead, ""));
  if (x.rfind("foreground", 0) == 0) return "foreground";
  if (x.rfind("background", 0) == 0) return "background";
  return x;
}

codec::TaskKind rule_mode(const std::string& t) {
  static const std::regex pose(R"(\bpose\b)");
  static const std::regex seg(R"(\bsegment(?:ation|ing)?\b)");
  static const std::regex det(R"(\bdetect(?:ion|ing|or)?\b)");
  static const std::regex cls(R"(\b(?:classif(?:y|ication|ier)|recogni[sz](?:e|ion))\b)");
  static const std::regex per(
      R"(\b(?:looks? (?:great|good|nice|pleasing)|visual(?:ly)?|percept(?:ion|ual)|human eyes?|subjective)\b)");
  if (contains(t, pose)) return codec::TaskKind::kPoseEstimation;
  if (contains(t, seg)) return codec::TaskKind::kSegmentation;
  if (contains(t, det)) return codec::TaskKind::kDetection;
  if (contains(t, cls)) return codec::TaskKind::kClassification;
  if (contains(t, per)) return codec::TaskKind::kPerception;
  return codec::TaskKind::kDistortion;
}

std::optional<std::string> rule_roi(const std::string& t) {
  static const std::string quality =
      R"((?:clear|sharp|crisp|detailed|readable|legible|intact|(?:with |in )?high[- ]quality|(?:with |in )?good quality))";
  static const std::regex keep("\\bkeep\\s+((?:[a-z]+\\s+){0,3}?[a-z]+)(?:\\s+in\\s+[\\w./-]+)?\\s+" +
                               quality + "\\b");
  static const std::regex remains("\\b((?:the\\s+)?[a-z]+(?:\\s+[a-z]+)?)\\s+(?:remains?|stays?)\\s+" +
                                  quality + "\\b");
  static const std::regex focus(R"(\b(?:focus on|prioriti[sz]e)\s+((?:the\s+)?[a-z]+(?:\s+objects?)?))");
  for (const auto* re : {&keep, &remains, &focus}) {
    if (auto x = search(t, *re)) {
      std::string obj = clean_object(*x);
      if (!obj.empty() && obj != "it" && obj != "image" && obj != "file") return obj;
    }
  }
  return std::nullopt;
}

std::optional<std::string> rule_transmit(const std::string& t) {
  static const std::regex only_verb(
      R"(\bonly\s+(?:compress|transmit|send|keep|encode|code|deliver)\s+((?:the\s+)?[a-z]+(?:\s+objects?)?))");
  static const std::regex verb_only(
      R"(\b(?:compress|transmit|send|keep|encode|code|deliver)\s+only\s+((?:the\s+)?[a-z]+(?:\s+objects?)?))");
  static const std::regex just(R"(\bjust\s+(?:transmit|send)\s+((?:the\s+)?[a-z]+))");
  for (const auto* re : {&only_verb, &verb_only, &just}) {
    if (auto x = search(t, *re)) {
      std::string obj = clean_object(*x);
      if (!obj.empty()) return obj;
    }
  }
  return std::nullopt;
}

}  // namespace

RequestPlan rule_parse(std::string_view instruction) {
  const std::string original(instruction);
  const std::string t = lower(original);
  RequestPlan p;

  static const std::regex file_re(R"(([\w./\\-]+\.(?:png|jpe?g|bmp|ppm|pgm|tiff?|webp)))",
                                  std::regex::icase);
  if (auto f = search(original, file_re)) p.file_path = *f;

  p.compression_mode = rule_mode(t);
  const bool machine = p.compression_mode != codec::TaskKind::kDistortion &&
                       p.compression_mode != codec::TaskKind::kPerception;

  // Byte sizes: "between A and B KB" sets both bounds, otherwise a single
  // figure is an upper bound.
  static const std::regex between_re(
      R"(\bbetween\s+(\d+(?:\.\d+)?)\s*(?:bytes?|kb|mb|b)?\s+and\s+(\d+(?:\.\d+)?)\s*(bytes?|kb|mb|b)\b)");
  static const std::regex size_re(R"((?:^|[^\w.])(\d+(?:\.\d+)?)\s*(bytes?|kb|mb|b)\b)");
  std::smatch m;
  if (std::regex_search(t, m, between_re)) {
    p.bitrate_min = std::stod(m[1].str());
    p.bitrate_max = std::stod(m[2].str());
    p.bitrate_unit = parse_unit(m[3].str());
    p.specific_bitrate_limit = true;
  } else if (std::regex_search(t, m, size_re)) {
    p.bitrate_max = std::stod(m[1].str());
    p.bitrate_unit = parse_unit(m[2].str());
    p.specific_bitrate_limit = true;
  }

  static const std::regex db_re(R"(((?:\b[a-z-]+\s+){0,3})(\d+(?:\.\d+)?)\s*db\b)");
  if (std::regex_search(t, m, db_re)) {
    static const std::regex lower_bound(
        R"(\b(?:at least|above|over|more than|no less than|higher than|minimum|min)\b)");
    const double v = std::stod(m[2].str());
    if (contains(m[1].str(), lower_bound)) {
      p.performance_min = v;
    } else {
      p.performance_max = v;
    }
    p.specific_performance_limit = true;
  }

  if (auto roi = rule_roi(t)) {
    p.roi_coding = true;
    p.roi_object = *roi;
  }

  if (auto tx = rule_transmit(t)) {
    p.objects_to_transmit = *tx;
  } else {
    p.objects_to_transmit = machine ? "foreground" : "all";
  }

  if (!p.specific_bitrate_limit) {
    static const std::regex minimum(
        R"(\b(?:as small as possible|smallest|minimum (?:file )?size|lowest (?:bitrate|size)|maximum compression)\b)");
    static const std::regex small(R"(\b(?:small(?:er)? file|compact|low bitrate)\b)");
    static const std::regex maximum(
        R"(\b(?:best (?:possible )?quality|highest (?:possible )?quality|maximum quality|as good as possible|lossless)\b)");
    static const std::regex large(R"(\b(?:very good quality|large(?:r)? file)\b)");
    if (contains(t, minimum)) p.encoded_size_level = SizeLevel::kMinimum;
    else if (contains(t, maximum)) p.encoded_size_level = SizeLevel::kMaximum;
    else if (contains(t, small)) p.encoded_size_level = SizeLevel::kSmall;
    else if (contains(t, large)) p.encoded_size_level = SizeLevel::kLarge;
  }

  static const std::regex explicit_weighted(
      R"(weighted[_ ]psnr\s*\(\s*([0-9]*\.?[0-9]+)\s*,\s*([0-9]*\.?[0-9]+)\s*\))");
  static const std::regex weighted_word(R"(\bweighted[_ ]psnr\b)");
  static const std::regex ratio_re(
      R"(\b(?:scale|ratio|weight)\b[^0-9]{0,24}(0?\.\d+|1(?:\.0+)?)\b)");
  static const std::regex psnr_word(R"(\bpsnr\b)");
  std::optional<MetricSpec> weighted;
  if (std::regex_search(t, m, explicit_weighted)) {
    weighted = MetricSpec::weighted(std::stod(m[1].str()), std::stod(m[2].str()));
  } else if (contains(t, weighted_word) || p.roi_coding) {
    double roi = 0.8;
    if (contains(t, weighted_word) && std::regex_search(t, m, ratio_re)) {
      const double r = std::stod(m[1].str());
      if (r >= 0.0 && r <= 1.0) roi = r;
    }
    weighted = MetricSpec::weighted(roi, 1.0 - roi);
  }
  MetricSpec base = MetricSpec::of_mode(p.compression_mode);
  if (p.compression_mode == codec::TaskKind::kDistortion && !weighted &&
      contains(t, psnr_word)) {
    base.kind = MetricSpec::Kind::kPsnr;
  }
  if (weighted && p.compression_mode == codec::TaskKind::kDistortion) {
    p.performance_metric = {*weighted};
  } else if (weighted) {
    p.performance_metric = {base, *weighted};
    p.metric_is_list = true;
  } else {
    p.performance_metric = {base};
  }
  return normalize(std::move(p));
}

size_t FieldReport::failures() const {
  return static_cast<size_t>(std::count_if(fields.begin(), fields.end(),
                                           [](const Field& f) { return !f.match; }));
}

FieldReport score(const RequestPlan& pred, const GoldLabel& gold) {
  FieldReport r;
  auto add = [&r](std::string name, bool match, std::string p, std::string e) {
    r.fields.push_back({std::move(name), match, std::move(p), std::move(e)});
  };
  auto show_opt = [](const std::optional<std::string>& s) { return s ? *s : "null"; };
  auto show_num = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("null");
  };
  auto bytes_of = [](const std::optional<double>& v,
                     const std::optional<ByteUnit>& unit) -> std::optional<double> {
    if (!v) return std::nullopt;
    const double scale = !unit || *unit == ByteUnit::kB ? 1.0
                         : *unit == ByteUnit::kKB       ? 1e3
                                                        : 1e6;
    return *v * scale;
  };
  auto num_eq = [](const std::optional<double>& a, const std::optional<double>& b) {
    if (!a || !b) return !a && !b;
    return std::abs(*a - *b) <= 1e-6 * std::max(1.0, std::abs(*b));
  };
  auto str_eq = [](const std::optional<std::string>& a, const std::optional<std::string>& b) {
    if (!a || !b) return !a && !b;
    return canonical_text(*a) == canonical_text(*b);
  };

  add("file_path", lower(trim(pred.file_path)) == lower(trim(gold.file_path)),
      pred.file_path, gold.file_path);
  add("compression_mode", pred.compression_mode == gold.compression_mode,
      std::string(codec::task_name(pred.compression_mode)),
      std::string(codec::task_name(gold.compression_mode)));
  add("RoI_coding", pred.roi_coding == gold.roi_coding, pred.roi_coding ? "true" : "false",
      gold.roi_coding ? "true" : "false");
  add("RoI_object", str_eq(pred.roi_object, gold.roi_object), show_opt(pred.roi_object),
      show_opt(gold.roi_object));
  add("Object_needed_to_be_transmitted",
      str_eq(pred.objects_to_transmit, gold.objects_to_transmit), pred.objects_to_transmit,
      gold.objects_to_transmit);
  add("encoded_size_level", pred.encoded_size_level == gold.encoded_size_level,
      std::string(size_level_name(pred.encoded_size_level)),
      std::string(size_level_name(gold.encoded_size_level)));
  add("specific_performance_limit",
      pred.specific_performance_limit == gold.specific_performance_limit,
      pred.specific_performance_limit ? "true" : "false",
      gold.specific_performance_limit ? "true" : "false");
  add("specific_bitrate_limit", pred.specific_bitrate_limit == gold.specific_bitrate_limit,
      pred.specific_bitrate_limit ? "true" : "false",
      gold.specific_bitrate_limit ? "true" : "false");

  {
    auto metrics_text = [](const RequestPlan& p) {
      std::string s;
      for (const auto& m : p.performance_metric) s += (s.empty() ? "" : ", ") + m.to_string();
      return s;
    };
    std::vector<MetricSpec> remaining = gold.performance_metric;
    bool match = pred.performance_metric.size() == gold.performance_metric.size();
    for (const auto& m : pred.performance_metric) {
      if (!match) break;
      auto it = std::find_if(remaining.begin(), remaining.end(), [&m](const MetricSpec& g) {
        return g.kind == m.kind && std::abs(g.roi_ratio - m.roi_ratio) <= kRatioTolerance &&
               std::abs(g.nonroi_ratio - m.nonroi_ratio) <= kRatioTolerance;
      });
      if (it == remaining.end()) {
        match = false;
      } else {
        remaining.erase(it);
      }
    }
    add("performance_metric", match, metrics_text(pred), metrics_text(gold));
  }

  const auto pmin = bytes_of(pred.bitrate_min, pred.bitrate_unit);
  const auto gmin = bytes_of(gold.bitrate_min, gold.bitrate_unit);
  const auto pmax = bytes_of(pred.bitrate_max, pred.bitrate_unit);
  const auto gmax = bytes_of(gold.bitrate_max, gold.bitrate_unit);
  add("bitrate_min", num_eq(pmin, gmin), show_num(pred.bitrate_min), show_num(gold.bitrate_min));
  add("bitrate_max", num_eq(pmax, gmax), show_num(pred.bitrate_max), show_num(gold.bitrate_max));
  {
    // Units only matter through the byte values they produce.
    bool match;
    if (!pred.bitrate_unit || !gold.bitrate_unit) {
      match = !pred.bitrate_unit && !gold.bitrate_unit;
    } else {
      match = num_eq(pmin, gmin) && num_eq(pmax, gmax);
    }
    auto show_unit = [](const std::optional<ByteUnit>& u) {
      return u ? std::string(unit_name(*u)) : std::string("null");
    };
    add("bitrate_unit", match, show_unit(pred.bitrate_unit), show_unit(gold.bitrate_unit));
  }
  add("performance_min", num_eq(pred.performance_min, gold.performance_min),
      show_num(pred.performance_min), show_num(gold.performance_min));
  add("performance_max", num_eq(pred.performance_max, gold.performance_max),
      show_num(pred.performance_max), show_num(gold.performance_max));

  r.success = r.failures() == 0;
  return r;
}

SuccessReport aggregate(const std::vector<ItemRuns>& items, int repeats) {
  if (repeats < 1) throw Error(ErrorCode::kMissingRuns, "repeats must be >= 1");
  SuccessReport r;
  double simple_sum = 0.0, hard_sum = 0.0;
  for (const auto& item : items) {
    if (item.successes.size() != static_cast<size_t>(repeats)) {
      throw Error(ErrorCode::kMissingRuns,
                  "item " + item.id + " has " + std::to_string(item.successes.size()) +
                      " runs, expected " + std::to_string(repeats));
    }
    const double rate =
        static_cast<double>(std::count(item.successes.begin(), item.successes.end(), true)) /
        repeats;
    if (item.difficulty == Difficulty::kSimple) {
      simple_sum += rate;
      ++r.simple_items;
    } else {
      hard_sum += rate;
      ++r.hard_items;
    }
  }
  r.simple_pct = r.simple_items ? 100.0 * simple_sum / r.simple_items : 0.0;
  r.hard_pct = r.hard_items ? 100.0 * hard_sum / r.hard_items : 0.0;
  const size_t total = r.simple_items + r.hard_items;
  r.all_pct = total ? 100.0 * (simple_sum + hard_sum) / total : 0.0;
  return r;
}

double combine_pct(double simple_pct, size_t simple_items, double hard_pct,
                   size_t hard_items) {
  const size_t total = simple_items + hard_items;
  if (total == 0) return 0.0;
  return (simple_pct * simple_items + hard_pct * hard_items) / total;
}

}  // namespace compx::plan
