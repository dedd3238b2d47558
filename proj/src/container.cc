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

#include "compx/container.h"

#include <algorithm>
#include <unordered_map>

#include "compx/error.h"
#include "compx/imaging.h"

namespace compx::container {

namespace {

constexpr uint8_t kMagic[4] = {'S', 'S', 'B', 'X'};
constexpr uint8_t kProfileKinds = 6;

class Writer {
 public:
  explicit Writer(size_t reserve) { out_.reserve(reserve); }
  void u8(uint8_t v) { out_.push_back(v); }
  void u16(uint16_t v) {
    out_.push_back(static_cast<uint8_t>(v));
    out_.push_back(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<uint8_t> take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  size_t remaining() const { return bytes_.size() - pos_; }
  void need(size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncated, std::string("stream ends inside ") + what);
    }
  }
  uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  uint16_t u16(const char* what) {
    need(2, what);
    uint16_t v = static_cast<uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::span<const uint8_t> take(size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

void check_dims(uint32_t width, uint32_t height, ErrorCode code) {
  if (width == 0 || height == 0 || width > imaging::kMaxDimension ||
      height > imaging::kMaxDimension) {
    throw Error(code, "dimensions " + std::to_string(width) + "x" +
                          std::to_string(height) + " out of range");
  }
}

// Shared by validate() and parse(): table order, per-group block counts
// against the block map, and payload lengths.
void check_table(const ContainerHeader& header,
                 std::span<const uint16_t> block_map, ErrorCode code) {
  std::unordered_map<uint16_t, uint32_t> counts;
  for (uint16_t id : block_map) ++counts[id];
  uint64_t total = 0;
  for (size_t i = 0; i < header.groups.size(); ++i) {
    const auto& g = header.groups[i];
    if (i > 0 && g.group_id <= header.groups[i - 1].group_id) {
      throw Error(code, "group ids not strictly increasing at entry " +
                            std::to_string(i));
    }
    if (g.label.size() > 255) throw Error(code, "label longer than 255 bytes");
    const auto it = counts.find(g.group_id);
    const uint32_t in_map = it == counts.end() ? 0 : it->second;
    if (g.block_count != in_map) {
      throw Error(code, "group " + std::to_string(g.group_id) + " claims " +
                            std::to_string(g.block_count) + " blocks, map has " +
                            std::to_string(in_map));
    }
    if (g.block_count > 0 && g.payload_len == 0) {
      throw Error(code, "group " + std::to_string(g.group_id) +
                            " has blocks but an empty payload");
    }
    total += g.block_count;
  }
  if (total > header.block_total()) {
    throw Error(code, "block counts exceed the block grid");
  }
}

}  // namespace

const GroupEntry* ContainerHeader::find(uint16_t id) const {
  auto it = std::lower_bound(
      groups.begin(), groups.end(), id,
      [](const GroupEntry& g, uint16_t v) { return g.group_id < v; });
  return it != groups.end() && it->group_id == id ? &*it : nullptr;
}

std::set<uint16_t> Container::group_ids() const {
  std::set<uint16_t> ids;
  for (const auto& g : header.groups) ids.insert(g.group_id);
  return ids;
}

std::optional<std::span<const uint8_t>> Container::segment_of(uint16_t id) const {
  for (size_t i = 0; i < header.groups.size(); ++i) {
    if (header.groups[i].group_id == id) return std::span<const uint8_t>(segments[i]);
  }
  return std::nullopt;
}

void validate(const Container& c) {
  constexpr auto code = ErrorCode::kInvariantViolation;
  check_dims(c.header.width, c.header.height, code);
  if (c.header.block_size != kBlockSize) throw Error(code, "block_size must be 8");
  if (c.header.colorspace != ColorSpace::kGray &&
      c.header.colorspace != ColorSpace::kYCbCr601) {
    throw Error(code, "unknown colorspace");
  }
  if (c.header.profile_kind >= kProfileKinds) throw Error(code, "unknown profile kind");
  if (c.header.groups.size() > 0xFFFF) throw Error(code, "too many groups");
  if (c.block_map.size() != c.header.block_total()) {
    throw Error(code, "block map size does not match the block grid");
  }
  if (c.segments.size() != c.header.groups.size()) {
    throw Error(code, "segment count does not match the group table");
  }
  check_table(c.header, c.block_map, code);
  for (size_t i = 0; i < c.segments.size(); ++i) {
    if (c.segments[i].size() != c.header.groups[i].payload_len) {
      throw Error(code, "segment " + std::to_string(i) +
                            " length differs from payload_len");
    }
  }
}

size_t serialized_size(const Container& c) {
  size_t n = kFixedHeaderBytes + 2 * c.block_map.size();
  for (const auto& g : c.header.groups) n += g.table_bytes() + g.payload_len;
  return n;
}

std::vector<uint8_t> serialize(const Container& c) {
  validate(c);
  Writer w(serialized_size(c));
  w.bytes(kMagic);
  w.u8(kVersion);
  w.u32(c.header.width);
  w.u32(c.header.height);
  w.u8(static_cast<uint8_t>(c.header.colorspace));
  w.u8(c.header.block_size);
  w.u8(c.header.profile_kind);
  w.u16(static_cast<uint16_t>(c.header.groups.size()));
  for (const auto& g : c.header.groups) {
    w.u16(g.group_id);
    w.u8(static_cast<uint8_t>(g.label.size()));
    w.bytes({reinterpret_cast<const uint8_t*>(g.label.data()), g.label.size()});
    w.u32(g.block_count);
    w.u32(g.payload_len);
  }
  for (uint16_t id : c.block_map) w.u16(id);
  for (const auto& s : c.segments) w.bytes(s);
  return w.take();
}

Container parse(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    throw Error(ErrorCode::kBadMagic, "not an SSBX stream");
  }
  const uint8_t version = r.u8("version");
  if (version != kVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "version " + std::to_string(version));
  }
  Container c;
  auto& h = c.header;
  h.width = r.u32("width");
  h.height = r.u32("height");
  check_dims(h.width, h.height, ErrorCode::kInconsistentHeader);
  const uint8_t cs = r.u8("colorspace");
  if (cs > 1) throw Error(ErrorCode::kInconsistentHeader, "unknown colorspace");
  h.colorspace = static_cast<ColorSpace>(cs);
  h.block_size = r.u8("block_size");
  if (h.block_size != kBlockSize) {
    throw Error(ErrorCode::kInconsistentHeader, "block_size must be 8");
  }
  h.profile_kind = r.u8("profile_kind");
  if (h.profile_kind >= kProfileKinds) {
    throw Error(ErrorCode::kInconsistentHeader, "unknown profile kind");
  }
  const uint16_t group_count = r.u16("group_count");
  // Each table entry takes at least 11 bytes.
  r.need(size_t{group_count} * 11, "group table");
  h.groups.reserve(group_count);
  for (uint16_t i = 0; i < group_count; ++i) {
    GroupEntry g;
    g.group_id = r.u16("group entry");
    const uint8_t len = r.u8("group entry");
    auto label = r.take(len, "group label");
    g.label.assign(label.begin(), label.end());
    g.block_count = r.u32("group entry");
    g.payload_len = r.u32("group entry");
    h.groups.push_back(std::move(g));
  }
  const size_t blocks = h.block_total();
  r.need(blocks * 2, "block map");
  c.block_map.resize(blocks);
  for (auto& id : c.block_map) id = r.u16("block map");
  check_table(h, c.block_map, ErrorCode::kInconsistentHeader);
  c.segments.reserve(h.groups.size());
  for (const auto& g : h.groups) {
    auto payload = r.take(g.payload_len, "segment");
    c.segments.emplace_back(payload.begin(), payload.end());
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kInconsistentHeader,
                std::to_string(r.remaining()) + " trailing bytes after segments");
  }
  return c;
}

Container extract(const Container& c, const std::set<uint16_t>& groups) {
  if (groups.empty()) throw Error(ErrorCode::kEmptySelection, "no groups requested");
  for (uint16_t id : groups) {
    if (!c.header.find(id)) {
      throw Error(ErrorCode::kUnknownGroup, "group " + std::to_string(id));
    }
  }
  Container out;
  out.header = c.header;
  out.header.groups.clear();
  out.block_map = c.block_map;
  for (size_t i = 0; i < c.header.groups.size(); ++i) {
    if (groups.count(c.header.groups[i].group_id)) {
      out.header.groups.push_back(c.header.groups[i]);
      out.segments.push_back(c.segments[i]);
    }
  }
  return out;
}

}  // namespace compx::container
