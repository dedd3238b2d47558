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


#include "compx/segmenter.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <regex>
#include <thread>

#include "compx/error.h"
#include "httplib.h"

namespace compx::segment {

namespace {

codec::GroupMask mask_from_gray(const imaging::ImageBuffer& img, uint32_t width,
                                uint32_t height, const std::map<uint16_t, std::string>& labels) {
  if (img.channels() != 1) {
    throw Error(ErrorCode::kUnsupportedFormat, "mask must be single-channel grayscale");
  }
  if (img.width() != width || img.height() != height) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask is " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    ", image is " + std::to_string(width) + "x" + std::to_string(height));
  }
  std::vector<uint16_t> raw(img.data().begin(), img.data().end());
  return codec::GroupMask(width, height, std::move(raw), labels);
}

std::vector<float> sobel_magnitude(const std::vector<float>& y, uint32_t w, uint32_t h) {
  std::vector<float> mag(y.size(), 0.0f);
  auto at = [&](int x, int yy) {
    x = std::clamp(x, 0, static_cast<int>(w) - 1);
    yy = std::clamp(yy, 0, static_cast<int>(h) - 1);
    return y[size_t(yy) * w + x];
  };
  for (int r = 0; r < static_cast<int>(h); ++r) {
    for (int c = 0; c < static_cast<int>(w); ++c) {
      const float gx = at(c + 1, r - 1) + 2 * at(c + 1, r) + at(c + 1, r + 1) - at(c - 1, r - 1) -
                       2 * at(c - 1, r) - at(c - 1, r + 1);
      const float gy = at(c - 1, r + 1) + 2 * at(c, r + 1) + at(c + 1, r + 1) - at(c - 1, r - 1) -
                       2 * at(c, r - 1) - at(c + 1, r - 1);
      mag[size_t(r) * w + c] = std::sqrt(gx * gx + gy * gy);
    }
  }
  return mag;
}

// Returns the highest bin that still belongs to the low class.
int otsu_bin(const std::array<uint64_t, 256>& hist) {
  uint64_t total = 0;
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    sum_all += double(i) * hist[i];
  }
  uint64_t w0 = 0;
  double sum0 = 0.0, best = -1.0;
  int best_bin = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += double(t) * hist[t];
    const uint64_t w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = double(w0) * double(w1) * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  return best_bin;
}

codec::GroupMask box_mask(uint32_t w, uint32_t h, uint32_t x0, uint32_t y0, uint32_t x1,
                          uint32_t y1, const std::string& label) {
  std::vector<uint16_t> ids(size_t{w} * h, 0);
  for (uint32_t y = y0; y < y1; ++y) {
    std::fill(ids.begin() + size_t{y} * w + x0, ids.begin() + size_t{y} * w + x1, 1);
  }
  return codec::GroupMask(w, h, std::move(ids), {{1, label}});
}

codec::GroupMask centered_half(uint32_t w, uint32_t h, const std::string& label) {
  const double s = std::sqrt(0.5);
  const uint32_t bw = std::max<uint32_t>(1, static_cast<uint32_t>(std::lround(w * s)));
  const uint32_t bh = std::max<uint32_t>(1, static_cast<uint32_t>(std::lround(h * s)));
  const uint32_t x0 = (w - bw) / 2, y0 = (h - bh) / 2;
  return box_mask(w, h, x0, y0, x0 + bw, y0 + bh, label);
}

void check_unit(float q, const char* name) {
  if (!(q >= 0.0f && q <= 1.0f)) {
    throw Error(ErrorCode::kRangeViolation, std::string(name) + " outside [0, 1]");
  }
}

}  // namespace

codec::GroupMask mask_from_file(const std::filesystem::path& path, uint32_t width,
                                uint32_t height, const std::map<uint16_t, std::string>& labels) {
  return mask_from_gray(imaging::load_image(path), width, height, labels);
}

codec::GroupMask heuristic_foreground(const imaging::ImageBuffer& image,
                                      const std::string& label) {
  const uint32_t w = image.width(), h = image.height();
  const std::vector<float> mag = sobel_magnitude(imaging::luma(image), w, h);
  const float peak = *std::max_element(mag.begin(), mag.end());
  if (!(peak > 0.0f)) return centered_half(w, h, label);

  std::array<uint64_t, 256> hist{};
  std::vector<uint8_t> bins(mag.size());
  for (size_t i = 0; i < mag.size(); ++i) {
    bins[i] = static_cast<uint8_t>(std::min(255.0f, std::floor(mag[i] / peak * 255.0f)));
    ++hist[bins[i]];
  }
  const int thr = otsu_bin(hist);

  // Largest 4-connected component of above-threshold pixels; raster order
  // breaks size ties.
  std::vector<int32_t> comp(mag.size(), -1);
  std::vector<size_t> stack;
  size_t best_size = 0;
  std::array<uint32_t, 4> best_box{};
  int32_t next = 0;
  for (size_t start = 0; start < mag.size(); ++start) {
    if (bins[start] <= thr || comp[start] >= 0) continue;
    size_t count = 0;
    uint32_t bx0 = w, by0 = h, bx1 = 0, by1 = 0;
    comp[start] = next;
    stack.assign(1, start);
    while (!stack.empty()) {
      const size_t p = stack.back();
      stack.pop_back();
      ++count;
      const uint32_t x = p % w, y = static_cast<uint32_t>(p / w);
      bx0 = std::min(bx0, x);
      by0 = std::min(by0, y);
      bx1 = std::max(bx1, x + 1);
      by1 = std::max(by1, y + 1);
      auto visit = [&](size_t q) {
        if (bins[q] > thr && comp[q] < 0) {
          comp[q] = next;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    if (count > best_size) {
      best_size = count;
      best_box = {bx0, by0, bx1, by1};
    }
    ++next;
  }
  const double coverage = double(best_size) / double(mag.size());
  if (best_size == 0 || coverage < 0.02 || coverage > 0.98) return centered_half(w, h, label);
  return box_mask(w, h, best_box[0], best_box[1], best_box[2], best_box[3], label);
}

codec::QualityMap quality_map_from_mask(const codec::GroupMask& mask, float q_roi, float q_bg) {
  check_unit(q_roi, "q_roi");
  check_unit(q_bg, "q_bg");
  if (q_bg > q_roi) throw Error(ErrorCode::kRangeViolation, "q_bg exceeds q_roi");
  std::vector<float> v(mask.ids().size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = mask.ids()[i] != 0 ? q_roi : q_bg;
  return codec::QualityMap(mask.width(), mask.height(), std::move(v));
}

codec::QualityMap quality_map_for_groups(const codec::GroupMask& mask,
                                         const std::set<uint16_t>& roi, float q_roi,
                                         float q_other) {
  check_unit(q_roi, "q_roi");
  check_unit(q_other, "q_other");
  std::vector<float> v(mask.ids().size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = roi.count(mask.ids()[i]) ? q_roi : q_other;
  return codec::QualityMap(mask.width(), mask.height(), std::move(v));
}

RemoteSegmenter::RemoteSegmenter(std::string base_url, int max_retries, double timeout_s,
                                 double backoff_base_s)
    : RemoteSegmenter(std::move(base_url), max_retries, timeout_s, backoff_base_s,
                      [](double s) {
                        std::this_thread::sleep_for(std::chrono::duration<double>(s));
                      }) {}

RemoteSegmenter::RemoteSegmenter(std::string base_url, int max_retries, double timeout_s,
                                 double backoff_base_s, Sleeper sleeper)
    : base_url_(std::move(base_url)),
      max_retries_(max_retries),
      timeout_s_(timeout_s),
      backoff_base_s_(backoff_base_s),
      sleep_(std::move(sleeper)) {}

codec::GroupMask RemoteSegmenter::segment(const imaging::ImageBuffer& image,
                                          const std::string& phrase) const {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url_, m, url_re)) {
    throw Error(ErrorCode::kProviderError, "bad provider url: " + base_url_);
  }
  std::string path = m[2].str();
  while (!path.empty() && path.back() == '/') path.pop_back();
  path += "/segment";
  httplib::Client client(m[1].str());
  const auto secs = static_cast<time_t>(timeout_s_);
  const auto usecs = static_cast<time_t>((timeout_s_ - secs) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);

  const std::vector<uint8_t> png = imaging::encode_png(image);
  const httplib::MultipartFormDataItems items = {
      {"image", std::string(png.begin(), png.end()), "image.png", "image/png"},
      {"phrase", phrase, "", ""},
  };
  std::string failure;
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    if (attempt > 0) sleep_(backoff_base_s_ * std::ldexp(1.0, attempt - 1));
    auto res = client.Post(path, items);
    if (!res) {
      failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        const auto bytes = std::span<const uint8_t>(
            reinterpret_cast<const uint8_t*>(res->body.data()), res->body.size());
        codec::GroupMask mask =
            mask_from_gray(imaging::decode_image(bytes), image.width(), image.height(), {});
        for (uint16_t id = 1; id < mask.group_count(); ++id) mask.set_label(id, phrase);
        return mask;
      } catch (const Error& e) {
        throw Error(ErrorCode::kProviderError, std::string("bad mask: ") + e.what());
      }
    }
    failure = "status " + std::to_string(res->status);
    if (res->status != 429 && res->status < 500) break;
  }
  throw Error(ErrorCode::kProviderError, failure);
}

codec::GroupMask acquire_mask(const MaskSource& source, const imaging::ImageBuffer& image,
                              const std::string& phrase) {
  switch (source.kind) {
    case SourceKind::kHeuristic:
      return heuristic_foreground(image, phrase);
    case SourceKind::kFile:
      if (source.locator.empty()) {
        throw Error(ErrorCode::kInvariantViolation, "file mask source needs a path");
      }
      return mask_from_file(source.locator, image.width(), image.height());
    case SourceKind::kRemote:
      if (source.locator.empty()) {
        throw Error(ErrorCode::kInvariantViolation, "remote mask source needs a URL");
      }
      return RemoteSegmenter(source.locator).segment(image, phrase);
  }
  throw Error(ErrorCode::kInvariantViolation, "unknown mask source");
}

}  // namespace compx::segment
