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

#ifndef COMPX_CONTAINER_H_
#define COMPX_CONTAINER_H_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

// The .ssbx semantically structured bitstream. Layout, all integers
// little-endian:
//
//   header     magic "SSBX" | version u8 | width u32 | height u32 |
//              colorspace u8 | block_size u8 | profile_kind u8 |
//              group_count u16 | group_count x GroupEntry
//   GroupEntry group_id u16 | label_len u8 | label bytes |
//              block_count u32 | payload_len u32
//   block_map  u16 group id per 8x8 block, row-major
//   segments   payloads in group-table order, byte-aligned
namespace compx::container {

inline constexpr uint8_t kVersion = 1;
inline constexpr uint8_t kBlockSize = 8;
inline constexpr size_t kFixedHeaderBytes = 18;

enum class ColorSpace : uint8_t { kGray = 0, kYCbCr601 = 1 };

struct GroupEntry {
  uint16_t group_id = 0;
  std::string label;
  uint32_t block_count = 0;
  uint32_t payload_len = 0;

  size_t table_bytes() const { return 2 + 1 + label.size() + 4 + 4; }
  bool operator==(const GroupEntry&) const = default;
};

struct ContainerHeader {
  uint32_t width = 0;
  uint32_t height = 0;
  ColorSpace colorspace = ColorSpace::kYCbCr601;
  uint8_t block_size = kBlockSize;
  uint8_t profile_kind = 0;
  std::vector<GroupEntry> groups;

  uint32_t blocks_x() const { return (width + kBlockSize - 1) / kBlockSize; }
  uint32_t blocks_y() const { return (height + kBlockSize - 1) / kBlockSize; }
  size_t block_total() const { return size_t{blocks_x()} * blocks_y(); }
  const GroupEntry* find(uint16_t id) const;
  bool operator==(const ContainerHeader&) const = default;
};

struct Container {
  ContainerHeader header;
  std::vector<uint16_t> block_map;
  std::vector<std::vector<uint8_t>> segments;

  std::set<uint16_t> group_ids() const;
  // Segment payload for a group in the table, or nullopt.
  std::optional<std::span<const uint8_t>> segment_of(uint16_t id) const;
  bool operator==(const Container&) const = default;
};

// Throws InvariantViolation when the container breaks its own invariants.
void validate(const Container& container);

std::vector<uint8_t> serialize(const Container& container);
size_t serialized_size(const Container& container);

// Never reads past the end of `bytes`. Errors: BadMagic, UnsupportedVersion,
// Truncated, InconsistentHeader.
Container parse(std::span<const uint8_t> bytes);

// Keeps only the requested groups; payload bytes are copied verbatim and the
// block map is kept whole so the decoder can still place omitted blocks.
// Errors: UnknownGroup, EmptySelection.
Container extract(const Container& container, const std::set<uint16_t>& groups);

}  // namespace compx::container

#endif  // COMPX_CONTAINER_H_
