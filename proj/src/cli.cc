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


#include "compx/cli.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "compx/agent.h"
#include "compx/bench.h"
#include "compx/container.h"
#include "compx/error.h"
#include "compx/metrics.h"
#include "compx/prompts.h"
#include "compx/segmenter.h"
#include "compx/service.h"
#include "text_util.h"

namespace compx::cli {

namespace {

using nlohmann::ordered_json;

std::atomic<bool> g_shutdown{false};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

ordered_json number(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(v > 0 ? "inf" : "-inf");
}

double to_double(const std::string& text, const std::string& what) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kConfigError, what + ": '" + text + "' is not a number");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, sep);) {
    part = text::trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::set<uint16_t> parse_groups(const std::string& text) {
  std::set<uint16_t> out;
  for (const auto& part : split(text, ',')) {
    char* end = nullptr;
    const long v = std::strtol(part.c_str(), &end, 10);
    if (*end != '\0' || v < 0 || v > 65535) throw UsageError("bad group id '" + part + "'");
    out.insert(static_cast<uint16_t>(v));
  }
  if (out.empty()) throw UsageError("--groups needs at least one id");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    try {
      out.push_back(to_double(part, "--q"));
    } catch (const Error& e) {
      throw UsageError(e.detail());
    }
  }
  return out;
}

std::map<uint16_t, std::string> parse_labels(const std::vector<std::string>& items) {
  std::map<uint16_t, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw UsageError("--label expects VALUE=NAME, got '" + item + "'");
    }
    const auto ids = parse_groups(item.substr(0, eq));
    out[*ids.begin()] = item.substr(eq + 1);
  }
  return out;
}

std::vector<uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, p.string());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)), {});
}

void write_bytes(const std::filesystem::path& p, const std::vector<uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
}

std::string join_ids(const std::set<uint16_t>& ids) {
  std::string s;
  for (uint16_t id : ids) s += (s.empty() ? "" : ",") + std::to_string(id);
  return s;
}

ordered_json groups_json(const container::Container& c) {
  ordered_json g = ordered_json::array();
  for (const auto& e : c.header.groups) {
    g.push_back({{"id", e.group_id},
                 {"label", e.label},
                 {"blocks", e.block_count},
                 {"payload_bytes", e.payload_len}});
  }
  return g;
}

std::vector<uint8_t> binary_roi(const imaging::ImageBuffer& mask) {
  if (mask.channels() != 1) throw Error(ErrorCode::kUnsupportedFormat, "mask must be grayscale");
  std::vector<uint8_t> roi(mask.data().begin(), mask.data().end());
  for (auto& v : roi) v = v != 0;
  return roi;
}

// Two numeric columns (rate, metric), or a header naming bpp and psnr.
std::vector<metrics::RdPoint> read_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, path.string());
  std::vector<metrics::RdPoint> pts;
  size_t rate_col = 0, metric_col = 1;
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    if (text::trim(line).empty() || text::trim(line)[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(text::trim(cell));
    const bool numeric = !cells.empty() && (std::isdigit(static_cast<unsigned char>(cells[0][0])) ||
                                            cells[0][0] == '-' || cells[0][0] == '.');
    if (pts.empty() && !numeric && no == 1) {
      for (size_t i = 0; i < cells.size(); ++i) {
        const std::string h = text::lower(cells[i]);
        if (h == "bpp" || h == "rate") rate_col = i;
        if (h == "psnr" || h == "metric") metric_col = i;
      }
      continue;
    }
    const std::string where = path.filename().string() + ":" + std::to_string(no);
    if (cells.size() <= std::max(rate_col, metric_col)) {
      throw Error(ErrorCode::kCorruptFile, where + ": missing columns");
    }
    // Sweep CSVs carry non-numeric image names in other columns only.
    try {
      pts.push_back({to_double(cells[rate_col], where), to_double(cells[metric_col], where)});
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorruptFile, e.detail());
    }
  }
  return pts;
}

std::filesystem::path default_session_dir() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  std::random_device rd;
  return std::filesystem::temp_directory_path() /
         ("compx-session-" + std::string(buf) + "-" + std::to_string(rd() % 100000));
}

void print_window(std::ostream& out, const char* name, const std::optional<agent::Window>& w) {
  if (w) out << name << ": [" << text::format_number(w->lo) << ", " << text::format_number(w->hi) << "]\n";
}

void print_trace(std::ostream& out, const agent::SessionTrace& t) {
  if (t.planned) {
    out << "plan: " << plan::to_json(t.plan).dump() << "\n";
    print_window(out, "byte window", t.constraints.byte_window);
    print_window(out, "performance window", t.constraints.perf_window);
    out << "gate metric: " << t.constraints.gate_metric.to_string() << "\n";
  }
  for (const auto& it : t.iterations) {
    out << "  #" << it.index << "  q=[" << text::format_number(it.q_factors[0]) << ", "
        << text::format_number(it.q_factors[1]) << "]  bytes=" << it.bytes
        << "  metric=" << fixed(it.metric_value, 4) << "  " << agent::verdict_name(it.verdict)
        << " (" << it.proposer << ")\n";
  }
  for (const auto& w : t.warnings) out << "warning: " << w << "\n";
  if (t.outcome) {
    out << "outcome: " << agent::outcome_name(*t.outcome);
    if (t.chosen_iteration) out << ", chosen iteration " << *t.chosen_iteration;
    out << "\n";
  }
}

std::string strip_quotes(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

}  // namespace

Settings parse_config(std::string_view text, Settings s) {
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    const std::string where = "line " + std::to_string(no);
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' || line[i] == '\'') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::kConfigError, where + ": bad section header");
      section = text::lower(text::trim(line.substr(1, line.size() - 2)));
      if (section != "chat" && section != "codec" && section != "agent") {
        throw Error(ErrorCode::kConfigError, where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfigError, where + ": expected key = value");
    std::string key = text::lower(text::trim(line.substr(0, eq)));
    const std::string value = strip_quotes(text::trim(line.substr(eq + 1)));
    if (section == "codec" && key.rfind("codec.", 0) != 0) key = "codec." + key;
    const std::string what = where + " (" + key + ")";

    if (key == "base_url") {
      s.chat.base_url = value;
    } else if (key == "model") {
      s.chat.model = value;
    } else if (key == "api_key") {
      s.chat.api_key = value;
    } else if (key == "temperature") {
      s.chat.temperature = to_double(value, what);
    } else if (key == "timeout_s") {
      s.chat.timeout_s = to_double(value, what);
    } else if (key == "backoff_base_s") {
      s.chat.backoff_base_s = to_double(value, what);
    } else if (key == "max_retries") {
      const double v = to_double(value, what);
      if (v != std::floor(v)) throw Error(ErrorCode::kConfigError, what + ": not an integer");
      s.chat.max_retries = static_cast<int>(v);
    } else if (key == "planner") {
      if (!agent::parse_planner_mode(value)) {
        throw Error(ErrorCode::kConfigError, what + ": unknown planner '" + value + "'");
      }
      s.planner = value;
    } else if (key == "proposer") {
      if (!agent::parse_proposer(value)) {
        throw Error(ErrorCode::kConfigError, what + ": unknown proposer '" + value + "'");
      }
      s.proposer = value;
    } else if (key == "codec.quality") {
      const double q = to_double(value, what);
      if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::kConfigError, what + ": outside [0, 1]");
      s.quality = static_cast<float>(q);
    } else if (key == "codec.profile") {
      const auto kind = codec::parse_task(value);
      if (!kind) throw Error(ErrorCode::kConfigError, what + ": unknown profile '" + value + "'");
      s.profile = *kind;
    } else {
      throw Error(ErrorCode::kConfigError, where + ": unknown key '" + key + "'");
    }
  }
  return s;
}

Settings load_config(const std::filesystem::path& path, Settings base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + " " + e.detail());
  }
}

void apply_env(Settings& s) {
  if (const char* v = std::getenv("COMPX_API_KEY"); v && *v) s.chat.api_key = v;
  if (const char* v = std::getenv("COMPX_BASE_URL"); v && *v) s.chat.base_url = v;
  if (const char* v = std::getenv("COMPX_MODEL"); v && *v) s.chat.model = v;
}

void request_shutdown() { g_shutdown.store(true); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Instruction-driven image compression with an LLM planning agent.", "compx"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  bool json_out = false;
  app.add_option("--config", config_path, "key=value settings file (default: ./compx.toml)");
  app.add_flag("--json", json_out, "Machine-readable output on stdout");

  const std::vector<std::string> planners{"rules", "llm", "llm_with_fallback"};
  const std::vector<std::string> proposers{"bisection", "llm"};
  std::vector<std::string> tasks;
  for (int k = 0; k <= 5; ++k) tasks.emplace_back(codec::task_name(static_cast<codec::TaskKind>(k)));

  // compress
  auto* compress = app.add_subcommand("compress", "Run an agent session on one instruction");
  std::string c_image, c_instruction, c_planner, c_proposer, c_mask, c_seg_url, c_out, c_fixture;
  compress->add_option("-i,--image", c_image, "Input image (default: the file named in the request)");
  compress->add_option("-m,--instruction", c_instruction, "Natural-language request")->required();
  auto* c_planner_opt =
      compress->add_option("--planner", c_planner, "rules, llm or llm_with_fallback")
          ->check(CLI::IsMember(planners));
  auto* c_proposer_opt =
      compress->add_option("--proposer", c_proposer, "bisection or llm")->check(CLI::IsMember(proposers));
  auto* c_mask_opt = compress->add_option("--mask", c_mask, "Grayscale mask file");
  compress->add_option("--segmenter-url", c_seg_url, "Remote segmentation provider")->excludes(c_mask_opt);
  compress->add_option("-o,--out", c_out, "Session directory (default: a fresh temp directory)");
  compress->add_option("--fixture", c_fixture, "Replay a recorded session, e.g. appendix_d");

  // codec
  auto* codec_cmd = app.add_subcommand("codec", "Encode, decode and extract .ssbx streams");
  codec_cmd->require_subcommand(1, 1);
  auto* enc = codec_cmd->add_subcommand("encode", "Encode an image");
  std::string e_in, e_out, e_mask, e_profile;
  double e_q = 0.5, e_roi_q = 0.0, e_bg_q = 0.0;
  std::vector<std::string> e_labels;
  enc->add_option("-i,--input", e_in, "Input image")->required();
  enc->add_option("-o,--output", e_out, "Output .ssbx")->required();
  auto* e_q_opt = enc->add_option("-q,--quality", e_q, "Uniform quality in [0, 1]");
  auto* e_mask_opt = enc->add_option("--mask", e_mask, "Grayscale group mask");
  enc->add_option("--label", e_labels, "VALUE=NAME label for a mask value")->needs(e_mask_opt);
  auto* e_roi_opt = enc->add_option("--roi-q", e_roi_q, "Quality of nonzero mask groups")
                        ->needs(e_mask_opt)
                        ->excludes(e_q_opt);
  auto* e_bg_opt =
      enc->add_option("--bg-q", e_bg_q, "Quality of the background group")->needs(e_roi_opt);
  auto* e_profile_opt = enc->add_option("--profile", e_profile, "Task profile")->check(CLI::IsMember(tasks));

  auto* dec = codec_cmd->add_subcommand("decode", "Decode a stream to an image");
  std::string d_in, d_out, d_groups;
  dec->add_option("-s,--stream", d_in, "Input .ssbx")->required();
  dec->add_option("-o,--output", d_out, "Output image (.png, .ppm, .pgm)")->required();
  auto* d_groups_opt = dec->add_option("--groups", d_groups, "Comma-separated group ids");

  auto* ext = codec_cmd->add_subcommand("extract", "Keep a subset of groups");
  std::string x_in, x_out, x_groups;
  ext->add_option("-s,--stream", x_in, "Input .ssbx")->required();
  ext->add_option("--groups", x_groups, "Comma-separated group ids")->required();
  ext->add_option("-o,--output", x_out, "Output .ssbx")->required();

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "Quality and rate metrics");
  metrics_cmd->require_subcommand(1, 1);
  auto* m_psnr = metrics_cmd->add_subcommand("psnr", "PSNR between two images");
  std::string m_a, m_b, m_mask;
  m_psnr->add_option("-a", m_a, "Reference image")->required();
  m_psnr->add_option("-b", m_b, "Test image")->required();
  auto* m_wpsnr = metrics_cmd->add_subcommand("wpsnr", "RoI-weighted PSNR");
  double m_alpha = 0.8, m_beta = 0.2;
  m_wpsnr->add_option("-a", m_a, "Reference image")->required();
  m_wpsnr->add_option("-b", m_b, "Test image")->required();
  m_wpsnr->add_option("--mask", m_mask, "Grayscale RoI mask (nonzero = RoI)")->required();
  m_wpsnr->add_option("--alpha", m_alpha, "RoI weight")->required();
  auto* m_beta_opt = m_wpsnr->add_option("--beta", m_beta, "Non-RoI weight (default 1 - alpha)");
  auto* m_bpp = metrics_cmd->add_subcommand("bpp", "Bits per pixel");
  uint64_t b_bytes = 0;
  std::string b_file, b_image;
  uint32_t b_w = 0, b_h = 0;
  auto* b_bytes_opt = m_bpp->add_option("--bytes", b_bytes, "Byte count");
  m_bpp->add_option("--file", b_file, "File whose size is the byte count")->excludes(b_bytes_opt);
  auto* b_image_opt = m_bpp->add_option("--image", b_image, "Image giving the dimensions");
  m_bpp->add_option("--width", b_w, "Width")->excludes(b_image_opt);
  m_bpp->add_option("--height", b_h, "Height")->excludes(b_image_opt);
  auto* m_bd = metrics_cmd->add_subcommand("bd", "Bjontegaard delta between two RD curves");
  std::string bd_ref, bd_test, bd_mode = "psnr";
  m_bd->add_option("--ref", bd_ref, "Reference curve CSV")->required();
  m_bd->add_option("--test", bd_test, "Test curve CSV")->required();
  m_bd->add_option("--mode", bd_mode, "psnr or rate")->check(CLI::IsMember({"psnr", "rate"}));

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Planning success rate and RD sweeps");
  bench_cmd->require_subcommand(1, 1);
  auto* b_run = bench_cmd->add_subcommand("run", "Score a planner against a suite");
  std::string r_suite, r_planner, r_format = "markdown", r_out;
  int r_repeats = 3;
  b_run->add_option("--suite", r_suite, "Suite JSONL (default: bundled mini-suite)");
  auto* r_planner_opt =
      b_run->add_option("--planner", r_planner, "Planner mode")->check(CLI::IsMember(planners));
  b_run->add_option("--repeats", r_repeats, "Repeats per item")->check(CLI::PositiveNumber);
  b_run->add_option("--format", r_format, "csv, markdown or json")
      ->check(CLI::IsMember({"csv", "markdown", "md", "json"}));
  b_run->add_option("-o,--output", r_out, "Report file (default: stdout)");
  auto* b_sweep = bench_cmd->add_subcommand("sweep", "Rate-distortion sweep with uniform quality");
  std::vector<std::string> s_images;
  std::string s_grid = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", s_format = "csv", s_out, s_profile;
  b_sweep->add_option("-i,--image", s_images, "Input images")->required();
  b_sweep->add_option("--q", s_grid, "Comma-separated increasing quality grid");
  auto* s_profile_opt =
      b_sweep->add_option("--profile", s_profile, "Task profile")->check(CLI::IsMember(tasks));
  b_sweep->add_option("--format", s_format, "csv, markdown or json")
      ->check(CLI::IsMember({"csv", "markdown", "md", "json"}));
  b_sweep->add_option("-o,--output", s_out, "Report file (default: stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string v_host = "127.0.0.1", v_work, v_ui, v_port_file;
  int v_port = 8080;
  serve->add_option("--host", v_host, "Bind address");
  serve->add_option("--port", v_port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--work-dir", v_work, "Session directory root");
  serve->add_option("--ui-dir", v_ui, "Static files served under /ui");
  serve->add_option("--port-file", v_port_file, "Write the bound port to this file");

  // prompts
  auto* prompts_cmd = app.add_subcommand("prompts", "Prompt store tools");
  prompts_cmd->require_subcommand(1, 1);
  auto* p_validate = prompts_cmd->add_subcommand("validate", "Load and check a prompt store");
  std::string p_dir;
  p_validate->add_option("--dir", p_dir, "Store directory (default: bundled store)");

  std::vector<std::string> argv_storage{"compx"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  auto fail = [&](std::string_view code, const std::string& message) {
    err << "error: " << code << ": " << message << "\n";
    if (json_out) {
      out << ordered_json{{"error", {{"code", code}, {"message", message}}}}.dump(2) << "\n";
    }
    return 1;
  };

  try {
    Settings s;
    if (!config_path.empty()) {
      s = load_config(config_path, s);
    } else if (std::filesystem::exists("compx.toml")) {
      s = load_config("compx.toml", s);
    }
    apply_env(s);

    if (compress->parsed()) {
      agent::Deps d;
      d.chat = s.chat;
      std::optional<agent::Fixture> fixture;
      if (!c_fixture.empty()) fixture = agent::load_fixture(c_fixture);
      const std::string planner =
          c_planner_opt->count() ? c_planner : (fixture ? "llm_with_fallback" : s.planner);
      const std::string proposer =
          c_proposer_opt->count() ? c_proposer : (fixture ? "llm" : s.proposer);
      d.planner = *agent::parse_planner_mode(planner);
      d.proposer = *agent::parse_proposer(proposer);
      if (fixture) {
        d.transport = std::make_shared<llm::ScriptedTransport>(fixture->replies);
        d.executor = std::make_shared<agent::ReplayExecutor>(fixture->executions, true);
        d.image_path = fixture->image;
      }
      if (!c_image.empty()) d.image_path = c_image;
      d.image_dirs = {std::filesystem::current_path(), agent::default_image_dir()};
      if (!c_mask.empty()) d.mask_source = segment::MaskSource{segment::SourceKind::kFile, c_mask};
      if (!c_seg_url.empty()) {
        d.mask_source = segment::MaskSource{segment::SourceKind::kRemote, c_seg_url};
      }
      d.session_dir = c_out.empty() ? default_session_dir() : std::filesystem::path(c_out);
      agent::Session session(d);
      const agent::SessionTrace& t = session.run(c_instruction);
      if (json_out) {
        ordered_json j;
        j["session_dir"] = d.session_dir.string();
        const ordered_json trace = agent::to_json(t);
        for (const auto& [k, v] : trace.items()) j[k] = v;
        out << j.dump(2) << "\n";
      } else {
        out << "session: " << d.session_dir.string() << "\n";
        print_trace(out, t);
      }
      if (t.error) {
        err << "error: " << t.error->code << ": " << t.error->message << " (stage "
            << t.error->stage << ")\n";
        return 1;
      }
      return 0;
    }

    if (enc->parsed()) {
      const auto image = imaging::load_image(e_in);
      const codec::GroupMask mask =
          e_mask.empty() ? codec::GroupMask(image.width(), image.height())
                         : segment::mask_from_file(e_mask, image.width(), image.height(),
                                                   parse_labels(e_labels));
      const float q = e_q_opt->count() ? static_cast<float>(e_q) : s.quality;
      codec::QualityMap qmap(image.width(), image.height(), q);
      if (e_roi_opt->count()) {
        std::set<uint16_t> roi;
        for (const auto& [id, label] : mask.labels()) {
          if (id != 0) roi.insert(id);
        }
        qmap = segment::quality_map_for_groups(mask, roi, static_cast<float>(e_roi_q),
                                               e_bg_opt->count() ? static_cast<float>(e_bg_q) : q);
      }
      const codec::TaskKind profile = e_profile_opt->count() ? *codec::parse_task(e_profile) : s.profile;
      const auto c = codec::encode(image, qmap, mask, codec::TaskProfile::for_kind(profile));
      const auto bytes = container::serialize(c);
      write_bytes(e_out, bytes);
      const double bpp = metrics::bpp_of_bytes(bytes.size(), image.width(), image.height());
      if (json_out) {
        out << ordered_json{{"output", e_out},
                            {"width", image.width()},
                            {"height", image.height()},
                            {"profile", codec::task_name(profile)},
                            {"bytes", bytes.size()},
                            {"bpp", bpp},
                            {"groups", groups_json(c)}}
                   .dump(2)
            << "\n";
      } else {
        out << "wrote " << e_out << ": " << bytes.size() << " bytes, " << fixed(bpp, 4) << " bpp, "
            << c.header.groups.size() << " group(s)\n";
      }
      return 0;
    }

    if (dec->parsed()) {
      const auto c = container::parse(read_bytes(d_in));
      std::optional<std::set<uint16_t>> groups;
      if (d_groups_opt->count()) groups = parse_groups(d_groups);
      const auto image = codec::decode(c, groups);
      imaging::save_image(image, d_out);
      const std::set<uint16_t> shown = groups ? *groups : c.group_ids();
      if (json_out) {
        out << ordered_json{{"output", d_out},
                            {"width", image.width()},
                            {"height", image.height()},
                            {"groups", shown}}
                   .dump(2)
            << "\n";
      } else {
        out << "wrote " << d_out << ": " << image.width() << "x" << image.height() << ", groups "
            << join_ids(shown) << "\n";
      }
      return 0;
    }

    if (ext->parsed()) {
      const auto c = container::extract(container::parse(read_bytes(x_in)), parse_groups(x_groups));
      const auto bytes = container::serialize(c);
      write_bytes(x_out, bytes);
      if (json_out) {
        out << ordered_json{{"output", x_out}, {"bytes", bytes.size()}, {"groups", groups_json(c)}}
                   .dump(2)
            << "\n";
      } else {
        out << "wrote " << x_out << ": " << bytes.size() << " bytes, groups "
            << join_ids(c.group_ids()) << "\n";
      }
      return 0;
    }

    if (m_psnr->parsed()) {
      const double v = metrics::psnr(imaging::load_image(m_a), imaging::load_image(m_b));
      if (json_out) {
        out << ordered_json{{"psnr", number(v)}}.dump(2) << "\n";
      } else {
        out << "PSNR: " << fixed(v, 4) << " dB\n";
      }
      return 0;
    }

    if (m_wpsnr->parsed()) {
      const metrics::RoiWeights w{m_alpha, m_beta_opt->count() ? m_beta : 1.0 - m_alpha};
      const auto roi = binary_roi(imaging::load_image(m_mask));
      const double v =
          metrics::weighted_psnr(imaging::load_image(m_a), imaging::load_image(m_b), roi, w);
      if (json_out) {
        out << ordered_json{{"weighted_psnr", number(v)}, {"alpha", w.alpha}, {"beta", w.beta}}.dump(2)
            << "\n";
      } else {
        out << "weighted PSNR (alpha " << text::format_number(w.alpha) << ", beta "
            << text::format_number(w.beta) << "): " << fixed(v, 4) << " dB\n";
      }
      return 0;
    }

    if (m_bpp->parsed()) {
      uint64_t bytes = b_bytes;
      if (!b_file.empty()) {
        if (!std::filesystem::exists(b_file)) throw Error(ErrorCode::kNotFound, b_file);
        bytes = std::filesystem::file_size(b_file);
      } else if (b_bytes_opt->count() == 0) {
        throw UsageError("bpp needs --bytes or --file");
      }
      uint32_t w = b_w, h = b_h;
      if (!b_image.empty()) {
        const auto img = imaging::load_image(b_image);
        w = img.width();
        h = img.height();
      }
      const double v = metrics::bpp_of_bytes(bytes, w, h);
      if (json_out) {
        out << ordered_json{{"bpp", v}, {"bytes", bytes}, {"width", w}, {"height", h}}.dump(2) << "\n";
      } else {
        out << "bpp: " << fixed(v, 4) << "\n";
      }
      return 0;
    }

    if (m_bd->parsed()) {
      const auto mode = bd_mode == "rate" ? metrics::BdMode::kRate : metrics::BdMode::kPsnr;
      const double v = metrics::bd_delta(read_curve(bd_ref), read_curve(bd_test), mode);
      if (json_out) {
        out << ordered_json{{"mode", bd_mode}, {"delta", v}}.dump(2) << "\n";
      } else if (mode == metrics::BdMode::kRate) {
        out << "BD-rate: " << fixed(v, 2) << " %\n";
      } else {
        out << "BD-PSNR: " << fixed(v, 2) << " dB\n";
      }
      return 0;
    }

    if (b_run->parsed()) {
      const auto suite = bench::load_suite(r_suite.empty() ? bench::default_suite_path()
                                                           : std::filesystem::path(r_suite));
      agent::Deps d;
      d.chat = s.chat;
      d.planner = *agent::parse_planner_mode(r_planner_opt->count() ? r_planner : s.planner);
      if (d.planner != agent::PlannerMode::kRules) {
        d.bundle = std::make_shared<const prompts::PromptBundle>(
            prompts::load_store(prompts::default_store_dir()));
        d.transport = std::make_shared<llm::LiveTransport>();
      }
      const auto report = bench::run_success_eval(suite, d, r_repeats);
      const auto format = json_out ? bench::Format::kJson : *bench::parse_format(r_format);
      const std::string text = bench::render(report, format);
      if (r_out.empty()) {
        out << text;
      } else {
        bench::write_report(text, r_out);
        out << "wrote " << r_out << "\n";
      }
      return 0;
    }

    if (b_sweep->parsed()) {
      std::vector<std::filesystem::path> images(s_images.begin(), s_images.end());
      const codec::TaskKind profile =
          s_profile_opt->count() ? *codec::parse_task(s_profile) : s.profile;
      const auto curves = bench::rd_sweep(images, parse_grid(s_grid), profile);
      const auto format = json_out ? bench::Format::kJson : *bench::parse_format(s_format);
      const std::string text = bench::render(curves, format);
      if (s_out.empty()) {
        out << text;
      } else {
        bench::write_report(text, s_out);
        out << "wrote " << s_out << "\n";
      }
      return 0;
    }

    if (serve->parsed()) {
      service::ServiceConfig cfg;
      cfg.base.chat = s.chat;
      if (!v_work.empty()) cfg.work_dir = v_work;
      if (!v_ui.empty()) cfg.ui_dir = v_ui;
      service::Service svc(std::move(cfg));
      const int port = svc.start(v_host, v_port);
      if (!v_port_file.empty()) {
        std::ofstream(v_port_file + ".tmp") << port << "\n";
        std::filesystem::rename(v_port_file + ".tmp", v_port_file);
      }
      out << "listening on http://" << v_host << ":" << port << " (sessions in "
          << svc.work_dir().string() << ")" << std::endl;
      g_shutdown.store(false);
      while (!g_shutdown.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
      svc.stop();
      out << "stopped\n";
      return 0;
    }

    if (p_validate->parsed()) {
      const std::filesystem::path dir = p_dir.empty() ? prompts::default_store_dir() : std::filesystem::path(p_dir);
      const auto bundle = prompts::load_store(dir);
      if (json_out) {
        ordered_json ids = ordered_json::array();
        for (const auto& t : bundle.transcripts) ids.push_back(t.id);
        out << ordered_json{{"dir", dir.string()},
                            {"planning_chars", bundle.planning_system.size()},
                            {"refinement_chars", bundle.refinement_system.size()},
                            {"transcripts", ids}}
                   .dump(2)
            << "\n";
      } else {
        out << "prompt store ok: " << dir.string() << "\n"
            << "  planning system prompt: " << bundle.planning_system.size() << " chars\n"
            << "  refinement system prompt: " << bundle.refinement_system.size() << " chars\n"
            << "  transcripts: " << bundle.transcripts.size() << "\n";
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    return fail(e.name(), e.detail());
  } catch (const std::exception& e) {
    return fail("Internal", e.what());
  }
  return 2;
}

}  // namespace compx::cli
