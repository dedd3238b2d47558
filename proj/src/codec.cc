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

#include "compx/codec.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "bitio.h"
#include "compx/error.h"

namespace compx::codec {

namespace {

using container::ColorSpace;
using container::Container;
using container::kBlockSize;

constexpr int kMaxLevel = 1 << 20;
// DC step relative to the weighted step.
constexpr float kDcStepScale = 0.25f;

// JPEG Annex K luminance table.
constexpr std::array<int, 64> kJpegLuma = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

struct DctBasis {
  std::array<float, 64> m{};  // m[k * 8 + n]
  DctBasis() {
    for (int k = 0; k < 8; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) {
        m[k * 8 + n] = static_cast<float>(
            scale * std::cos((2 * n + 1) * k * std::numbers::pi / 16.0));
      }
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

int quantize(float coef, float step) {
  // Round half away from zero.
  const double v = static_cast<double>(coef) / step;
  const double r = v >= 0 ? std::floor(v + 0.5) : -std::floor(-v + 0.5);
  return static_cast<int>(std::clamp(r, -double{kMaxLevel}, double{kMaxLevel}));
}

int quality_level(float q) {
  return static_cast<int>(std::lround(std::clamp(q, 0.0f, 1.0f) * kQualityLevels));
}

float level_to_step(int qi) {
  return quality_to_step(static_cast<float>(qi) / kQualityLevels);
}

// Working planes (1 for gray, 3 for YCbCr) with samples level-shifted by
// -128 on the way in.
struct Planes {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<std::vector<float>> p;
};

Planes to_planes(const imaging::ImageBuffer& image) {
  Planes out{image.width(), image.height(), {}};
  if (image.channels() == 1) {
    out.p.emplace_back(image.pixel_count());
    for (size_t i = 0; i < image.pixel_count(); ++i) out.p[0][i] = image.data()[i];
  } else {
    auto ycc = imaging::rgb_to_ycbcr(image);
    out.p = {std::move(ycc.y), std::move(ycc.cb), std::move(ycc.cr)};
  }
  for (auto& plane : out.p) {
    for (auto& v : plane) v -= 128.0f;
  }
  return out;
}

imaging::ImageBuffer from_planes(Planes planes) {
  for (auto& plane : planes.p) {
    for (auto& v : plane) v += 128.0f;
  }
  if (planes.p.size() == 1) {
    imaging::ImageBuffer out(planes.width, planes.height, 1);
    auto px = out.data();
    for (size_t i = 0; i < px.size(); ++i) {
      px[i] = static_cast<uint8_t>(std::clamp(std::lround(planes.p[0][i]), 0L, 255L));
    }
    return out;
  }
  imaging::PlanarF32 ycc{planes.width, planes.height, std::move(planes.p[0]),
                         std::move(planes.p[1]), std::move(planes.p[2])};
  return imaging::ycbcr_to_rgb(ycc);
}

// Copies one 8x8 block with edge replication past the image border.
void load_block(const std::vector<float>& plane, uint32_t width, uint32_t height,
                uint32_t bx, uint32_t by, std::span<float, 64> out) {
  for (uint32_t y = 0; y < 8; ++y) {
    const uint32_t sy = std::min(by * 8 + y, height - 1);
    for (uint32_t x = 0; x < 8; ++x) {
      const uint32_t sx = std::min(bx * 8 + x, width - 1);
      out[y * 8 + x] = plane[size_t{sy} * width + sx];
    }
  }
}

void store_block(std::vector<float>& plane, uint32_t width, uint32_t height,
                 uint32_t bx, uint32_t by, std::span<const float, 64> in) {
  for (uint32_t y = 0; y < 8 && by * 8 + y < height; ++y) {
    for (uint32_t x = 0; x < 8 && bx * 8 + x < width; ++x) {
      plane[size_t{by * 8 + y} * width + bx * 8 + x] = in[y * 8 + x];
    }
  }
}

float block_mean_quality(const QualityMap& qmap, uint32_t bx, uint32_t by) {
  double sum = 0.0;
  uint32_t n = 0;
  for (uint32_t y = by * 8; y < std::min(by * 8 + 8, qmap.height()); ++y) {
    for (uint32_t x = bx * 8; x < std::min(bx * 8 + 8, qmap.width()); ++x) {
      sum += qmap.at(x, y);
      ++n;
    }
  }
  return static_cast<float>(sum / n);
}

float coefficient_step(const TaskProfile& profile, float step, int i) {
  return step * profile.quant_weights[i] * (i == 0 ? kDcStepScale : 1.0f);
}

void encode_channel_block(BitWriter& bits, std::span<const float, 64> coefs,
                          const TaskProfile& profile, float step, int& prev_dc) {
  std::array<int, 64> levels;
  for (int i = 0; i < 64; ++i) {
    levels[i] = quantize(coefs[i], coefficient_step(profile, step, i));
  }
  bits.put_se(levels[0] - prev_dc);
  prev_dc = levels[0];
  uint32_t nnz = 0;
  for (int z = 1; z < 64; ++z) nnz += levels[kZigzag[z]] != 0;
  bits.put_ue(nnz);
  uint32_t run = 0;
  for (int z = 1; z < 64; ++z) {
    const int l = levels[kZigzag[z]];
    if (l == 0) {
      ++run;
      continue;
    }
    bits.put_ue(run);
    bits.put_ue(static_cast<uint32_t>(std::abs(l)) - 1);
    bits.put_bit(l < 0 ? 1 : 0);
    run = 0;
  }
}

void decode_channel_block(BitReader& bits, std::span<float, 64> coefs,
                          const TaskProfile& profile, float step, int& prev_dc) {
  std::array<int, 64> levels{};
  const int64_t dc = int64_t{prev_dc} + bits.get_se();
  if (dc < -kMaxLevel || dc > kMaxLevel) {
    throw Error(ErrorCode::kCorruptSegment, "DC level out of range");
  }
  levels[0] = static_cast<int>(dc);
  prev_dc = levels[0];
  const uint32_t nnz = bits.get_ue();
  if (nnz > 63) throw Error(ErrorCode::kCorruptSegment, "too many AC coefficients");
  uint32_t z = 1;
  for (uint32_t i = 0; i < nnz; ++i) {
    const uint32_t run = bits.get_ue();
    const uint32_t mag = bits.get_ue();
    const bool negative = bits.get_bit() != 0;
    if (run > 63 || z + run > 63 || mag >= kMaxLevel) {
      throw Error(ErrorCode::kCorruptSegment, "AC run or level out of range");
    }
    z += run;
    const int l = static_cast<int>(mag) + 1;
    levels[kZigzag[z]] = negative ? -l : l;
    ++z;
  }
  for (int i = 0; i < 64; ++i) {
    coefs[i] = static_cast<float>(levels[i]) * coefficient_step(profile, step, i);
  }
}

}  // namespace

const std::array<uint8_t, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

QualityMap::QualityMap(uint32_t width, uint32_t height, float fill)
    : QualityMap(width, height, std::vector<float>(size_t{width} * height, fill)) {}

QualityMap::QualityMap(uint32_t width, uint32_t height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != size_t{width} * height) {
    throw Error(ErrorCode::kDimensionMismatch, "quality map size mismatch");
  }
  for (float v : values_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorCode::kOutOfRange, "quality value outside [0, 1]");
    }
  }
}

GroupMask::GroupMask(uint32_t width, uint32_t height)
    : width_(width), height_(height), ids_(size_t{width} * height, 0),
      labels_{{0, "background"}} {}

GroupMask::GroupMask(uint32_t width, uint32_t height, std::vector<uint16_t> raw_ids,
                     const std::map<uint16_t, std::string>& labels)
    : width_(width), height_(height), ids_(std::move(raw_ids)) {
  if (ids_.size() != size_t{width} * height) {
    throw Error(ErrorCode::kDimensionMismatch, "group mask size mismatch");
  }
  std::set<uint16_t> present(ids_.begin(), ids_.end());
  present.insert(0);
  std::map<uint16_t, uint16_t> dense;
  uint16_t next = 0;
  for (uint16_t raw : present) {
    dense[raw] = next;
    if (raw == 0) {
      labels_[next] = "background";
    } else if (auto it = labels.find(raw); it != labels.end()) {
      labels_[next] = it->second;
    } else {
      labels_[next] = "object" + std::to_string(next);
    }
    ++next;
  }
  for (auto& id : ids_) id = dense[id];
}

void GroupMask::set_label(uint16_t id, std::string label) {
  if (!labels_.count(id)) throw Error(ErrorCode::kUnknownGroup, std::to_string(id));
  labels_[id] = std::move(label);
}

std::set<uint16_t> GroupMask::find_label(std::string_view label) const {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  const std::string want = lower(label);
  std::set<uint16_t> out;
  for (const auto& [id, name] : labels_) {
    if (lower(name) == want) out.insert(id);
  }
  return out;
}

std::vector<uint8_t> GroupMask::foreground() const {
  std::vector<uint8_t> out(ids_.size());
  for (size_t i = 0; i < ids_.size(); ++i) out[i] = ids_[i] != 0;
  return out;
}

std::string_view task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kDistortion: return "distortion";
    case TaskKind::kPerception: return "perception";
    case TaskKind::kClassification: return "classification";
    case TaskKind::kSegmentation: return "segmentation";
    case TaskKind::kDetection: return "detection";
    case TaskKind::kPoseEstimation: return "pose_estimation";
  }
  return "distortion";
}

std::optional<TaskKind> parse_task(std::string_view name) {
  for (uint8_t k = 0; k < 6; ++k) {
    if (task_name(static_cast<TaskKind>(k)) == name) return static_cast<TaskKind>(k);
  }
  return std::nullopt;
}

TaskProfile TaskProfile::for_kind(TaskKind kind) {
  TaskProfile p;
  p.kind = kind;
  p.quant_weights.fill(1.0f);
  if (kind == TaskKind::kPerception) {
    for (int i = 0; i < 64; ++i) {
      p.quant_weights[i] = std::max(1.0f, kJpegLuma[i] / 16.0f);
    }
  }
  return p;
}

float quality_to_step(float q) {
  if (!(q >= 0.0f && q <= 1.0f)) {
    throw Error(ErrorCode::kOutOfRange, "quality " + std::to_string(q));
  }
  // 64^(1-q) * 1^q, written as a power of two so the endpoints are exact.
  return std::exp2(6.0f * (1.0f - q));
}

BlockAssignment assign_blocks(const GroupMask& mask) {
  BlockAssignment out;
  out.blocks_x = (mask.width() + kBlockSize - 1) / kBlockSize;
  out.blocks_y = (mask.height() + kBlockSize - 1) / kBlockSize;
  out.group_of_block.resize(size_t{out.blocks_x} * out.blocks_y);
  std::map<uint16_t, uint32_t> counts;
  for (uint32_t by = 0; by < out.blocks_y; ++by) {
    for (uint32_t bx = 0; bx < out.blocks_x; ++bx) {
      counts.clear();
      for (uint32_t y = by * 8; y < std::min(by * 8 + 8, mask.height()); ++y) {
        for (uint32_t x = bx * 8; x < std::min(bx * 8 + 8, mask.width()); ++x) {
          ++counts[mask.at(x, y)];
        }
      }
      // Ascending id order, so strict '>' keeps the lowest id on ties.
      uint16_t best = 0;
      uint32_t best_count = 0;
      for (const auto& [id, n] : counts) {
        if (n > best_count) {
          best = id;
          best_count = n;
        }
      }
      out.group_of_block[size_t{by} * out.blocks_x + bx] = best;
    }
  }
  return out;
}

void forward_dct8x8(std::span<float, 64> block) {
  const auto& m = basis().m;
  std::array<float, 64> tmp;
  for (int r = 0; r < 8; ++r) {
    for (int k = 0; k < 8; ++k) {
      float acc = 0.0f;
      for (int n = 0; n < 8; ++n) acc += m[k * 8 + n] * block[r * 8 + n];
      tmp[r * 8 + k] = acc;
    }
  }
  for (int c = 0; c < 8; ++c) {
    for (int k = 0; k < 8; ++k) {
      float acc = 0.0f;
      for (int n = 0; n < 8; ++n) acc += m[k * 8 + n] * tmp[n * 8 + c];
      block[k * 8 + c] = acc;
    }
  }
}

void inverse_dct8x8(std::span<float, 64> block) {
  const auto& m = basis().m;
  std::array<float, 64> tmp;
  for (int c = 0; c < 8; ++c) {
    for (int n = 0; n < 8; ++n) {
      float acc = 0.0f;
      for (int k = 0; k < 8; ++k) acc += m[k * 8 + n] * block[k * 8 + c];
      tmp[n * 8 + c] = acc;
    }
  }
  for (int r = 0; r < 8; ++r) {
    for (int n = 0; n < 8; ++n) {
      float acc = 0.0f;
      for (int k = 0; k < 8; ++k) acc += m[k * 8 + n] * tmp[r * 8 + k];
      block[r * 8 + n] = acc;
    }
  }
}

Container encode(const imaging::ImageBuffer& image, const QualityMap& qmap,
                 const GroupMask& mask, const TaskProfile& profile) {
  if (qmap.width() != image.width() || qmap.height() != image.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "quality map does not match image");
  }
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "group mask does not match image");
  }
  const BlockAssignment blocks = assign_blocks(mask);
  const Planes planes = to_planes(image);

  Container c;
  c.header.width = image.width();
  c.header.height = image.height();
  c.header.colorspace = image.channels() == 1 ? ColorSpace::kGray : ColorSpace::kYCbCr601;
  c.header.profile_kind = static_cast<uint8_t>(profile.kind);
  c.block_map = blocks.group_of_block;

  struct SegmentState {
    BitWriter bits;
    int prev_qi = 0;
    std::array<int, 3> prev_dc{};
    uint32_t blocks = 0;
  };
  std::map<uint16_t, SegmentState> segments;
  for (const auto& [id, label] : mask.labels()) segments[id];

  std::array<float, 64> block;
  for (uint32_t by = 0; by < blocks.blocks_y; ++by) {
    for (uint32_t bx = 0; bx < blocks.blocks_x; ++bx) {
      const uint16_t gid = blocks.group_of_block[size_t{by} * blocks.blocks_x + bx];
      SegmentState& seg = segments[gid];
      const int qi = quality_level(block_mean_quality(qmap, bx, by));
      seg.bits.put_se(qi - seg.prev_qi);
      seg.prev_qi = qi;
      const float step = level_to_step(qi);
      for (size_t ch = 0; ch < planes.p.size(); ++ch) {
        load_block(planes.p[ch], planes.width, planes.height, bx, by, block);
        forward_dct8x8(block);
        encode_channel_block(seg.bits, block, profile, step, seg.prev_dc[ch]);
      }
      ++seg.blocks;
    }
  }

  for (auto& [id, seg] : segments) {
    container::GroupEntry entry;
    entry.group_id = id;
    entry.label = mask.labels().count(id) ? mask.labels().at(id) : "object" + std::to_string(id);
    if (entry.label.size() > 255) entry.label.resize(255);
    entry.block_count = seg.blocks;
    auto payload = seg.bits.finish();
    entry.payload_len = static_cast<uint32_t>(payload.size());
    c.header.groups.push_back(std::move(entry));
    c.segments.push_back(std::move(payload));
  }
  return c;
}

imaging::ImageBuffer decode(const Container& stream,
                            const std::optional<std::set<uint16_t>>& groups) {
  container::validate(stream);
  const std::set<uint16_t> wanted = groups ? *groups : stream.group_ids();
  for (uint16_t id : wanted) {
    if (!stream.header.find(id)) {
      throw Error(ErrorCode::kUnknownGroup, "group " + std::to_string(id));
    }
  }
  const auto& h = stream.header;
  const TaskProfile profile = TaskProfile::for_kind(static_cast<TaskKind>(h.profile_kind));
  const size_t channels = h.colorspace == ColorSpace::kGray ? 1 : 3;

  // Zero after the level shift is gray 128.
  Planes planes{h.width, h.height, {}};
  planes.p.assign(channels, std::vector<float>(size_t{h.width} * h.height, 0.0f));

  const uint32_t bxn = h.blocks_x();
  std::array<float, 64> block;
  for (uint16_t id : wanted) {
    const auto payload = *stream.segment_of(id);
    BitReader bits(payload);
    int prev_qi = 0;
    std::array<int, 3> prev_dc{};
    for (size_t b = 0; b < stream.block_map.size(); ++b) {
      if (stream.block_map[b] != id) continue;
      const int64_t qi = int64_t{prev_qi} + bits.get_se();
      if (qi < 0 || qi > kQualityLevels) {
        throw Error(ErrorCode::kCorruptSegment, "block quality out of range");
      }
      prev_qi = static_cast<int>(qi);
      const float step = level_to_step(prev_qi);
      const uint32_t bx = static_cast<uint32_t>(b % bxn);
      const uint32_t by = static_cast<uint32_t>(b / bxn);
      for (size_t ch = 0; ch < channels; ++ch) {
        decode_channel_block(bits, block, profile, step, prev_dc[ch]);
        inverse_dct8x8(block);
        store_block(planes.p[ch], h.width, h.height, bx, by, block);
      }
    }
    if (!bits.at_padding()) {
      throw Error(ErrorCode::kCorruptSegment,
                  "trailing data in segment of group " + std::to_string(id));
    }
  }
  return from_planes(std::move(planes));
}

}  // namespace compx::codec
