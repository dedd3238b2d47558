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

#ifndef COMPX_CODEC_H_
#define COMPX_CODEC_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compx/container.h"
#include "compx/imaging.h"

namespace compx::codec {

// Per-pixel rate control in [0, 1]; 0 is the lowest rate.
class QualityMap {
 public:
  QualityMap() = default;
  QualityMap(uint32_t width, uint32_t height, float fill);
  QualityMap(uint32_t width, uint32_t height, std::vector<float> values);

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }
  float at(uint32_t x, uint32_t y) const { return values_[size_t{y} * width_ + x]; }
  std::span<const float> values() const { return values_; }

 private:
  uint32_t width_ = 0;
  uint32_t height_ = 0;
  std::vector<float> values_;
};

// Object partition of the image. Ids are dense, 0 is the background.
class GroupMask {
 public:
  GroupMask() = default;
  // Every pixel in group 0, labeled "background".
  GroupMask(uint32_t width, uint32_t height);
  // Relabels `raw_ids` densely in ascending order (0 stays 0 when present).
  // `labels` is keyed by raw id; missing entries get "object<k>".
  GroupMask(uint32_t width, uint32_t height, std::vector<uint16_t> raw_ids,
            const std::map<uint16_t, std::string>& labels = {});

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }
  uint16_t at(uint32_t x, uint32_t y) const { return ids_[size_t{y} * width_ + x]; }
  std::span<const uint16_t> ids() const { return ids_; }
  const std::map<uint16_t, std::string>& labels() const { return labels_; }
  uint16_t group_count() const { return static_cast<uint16_t>(labels_.size()); }
  void set_label(uint16_t id, std::string label);
  // Groups whose label equals `label` after lowercasing.
  std::set<uint16_t> find_label(std::string_view label) const;
  // 1 for pixels outside group 0.
  std::vector<uint8_t> foreground() const;

 private:
  uint32_t width_ = 0;
  uint32_t height_ = 0;
  std::vector<uint16_t> ids_;
  std::map<uint16_t, std::string> labels_;
};

enum class TaskKind : uint8_t {
  kDistortion = 0,
  kPerception = 1,
  kClassification = 2,
  kSegmentation = 3,
  kDetection = 4,
  kPoseEstimation = 5,
};

std::string_view task_name(TaskKind kind);
std::optional<TaskKind> parse_task(std::string_view name);

struct TaskProfile {
  TaskKind kind = TaskKind::kDistortion;
  // Natural (row-major) order, all entries >= 1.
  std::array<float, 64> quant_weights{};

  static TaskProfile for_kind(TaskKind kind);
};

struct BlockAssignment {
  uint32_t blocks_x = 0;
  uint32_t blocks_y = 0;
  std::vector<uint16_t> group_of_block;
};

inline constexpr float kMaxStep = 64.0f;
inline constexpr float kMinStep = 1.0f;
// Block quality is carried in the stream with this many levels.
inline constexpr int kQualityLevels = 4095;

// step = 64^(1-q) * 1^q. Throws OutOfRange outside [0, 1].
float quality_to_step(float q);

// Majority group per 8x8 block; ties go to the lowest id.
BlockAssignment assign_blocks(const GroupMask& mask);

// Orthonormal 8x8 DCT-II and its inverse, in place, natural order.
void forward_dct8x8(std::span<float, 64> block);
void inverse_dct8x8(std::span<float, 64> block);

extern const std::array<uint8_t, 64> kZigzag;

// Deterministic. Throws DimensionMismatch when the map or mask size
// differs from the image.
container::Container encode(const imaging::ImageBuffer& image,
                            const QualityMap& qmap, const GroupMask& mask,
                            const TaskProfile& profile);

// Reconstructs the requested groups; blocks of any other group are filled
// with neutral gray 128. nullopt means every group in the header.
// Errors: UnknownGroup, CorruptSegment.
imaging::ImageBuffer decode(const container::Container& stream,
                            const std::optional<std::set<uint16_t>>& groups = std::nullopt);

}  // namespace compx::codec

#endif  // COMPX_CODEC_H_
