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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "compx/codec.h"
#include "compx/container.h"
#include "compx/metrics.h"
#include "test_util.h"

namespace compx::codec {
namespace {

using compx::testing::filled_image;
using compx::testing::random_image;
using compx::testing::random_mask;
using compx::testing::rect_mask;
using compx::testing::smooth_image;

// Textbook O(N^4) orthonormal DCT-II in double precision.
std::array<double, 64> naive_dct(const std::array<float, 64>& in) {
  std::array<double, 64> out{};
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          acc += in[y * 8 + x] * std::cos((2 * y + 1) * u * std::numbers::pi / 16.0) *
                 std::cos((2 * x + 1) * v * std::numbers::pi / 16.0);
        }
      }
      const double cu = u == 0 ? std::sqrt(0.125) : 0.5;
      const double cv = v == 0 ? std::sqrt(0.125) : 0.5;
      out[u * 8 + v] = cu * cv * acc;
    }
  }
  return out;
}

// Per-block majority by direct counting over a 2-D histogram.
std::vector<uint16_t> majority_oracle(const GroupMask& mask) {
  const uint32_t bx_n = (mask.width() + 7) / 8, by_n = (mask.height() + 7) / 8;
  std::vector<uint16_t> out;
  for (uint32_t by = 0; by < by_n; ++by) {
    for (uint32_t bx = 0; bx < bx_n; ++bx) {
      std::vector<int> hist(mask.group_count(), 0);
      for (uint32_t y = by * 8; y < by * 8 + 8; ++y) {
        for (uint32_t x = bx * 8; x < bx * 8 + 8; ++x) {
          if (x < mask.width() && y < mask.height()) ++hist[mask.at(x, y)];
        }
      }
      out.push_back(static_cast<uint16_t>(
          std::max_element(hist.begin(), hist.end()) - hist.begin()));
    }
  }
  return out;
}

TEST(QualityToStep, Endpoints) {
  EXPECT_FLOAT_EQ(quality_to_step(0.0f), 64.0f);
  EXPECT_FLOAT_EQ(quality_to_step(1.0f), 1.0f);
  EXPECT_FLOAT_EQ(quality_to_step(0.5f), 8.0f);
}

TEST(QualityToStep, StrictlyDecreasing) {
  float prev = quality_to_step(0.0f);
  for (int i = 1; i <= 1000; ++i) {
    const float s = quality_to_step(static_cast<float>(i) / 1000.0f);
    ASSERT_LT(s, prev);
    prev = s;
  }
}

TEST(QualityToStep, OutOfRange) {
  EXPECT_COMPX_ERROR(quality_to_step(-0.01f), ErrorCode::kOutOfRange);
  EXPECT_COMPX_ERROR(quality_to_step(1.01f), ErrorCode::kOutOfRange);
  EXPECT_COMPX_ERROR(quality_to_step(std::nanf("")), ErrorCode::kOutOfRange);
}

TEST(QualityMap, Validation) {
  EXPECT_COMPX_ERROR(QualityMap(2, 2, 1.5f), ErrorCode::kOutOfRange);
  EXPECT_COMPX_ERROR(QualityMap(2, 2, std::vector<float>{0, 0, 0}),
                     ErrorCode::kDimensionMismatch);
  EXPECT_COMPX_ERROR(QualityMap(1, 2, std::vector<float>{0.5f, -0.1f}),
                     ErrorCode::kOutOfRange);
}

TEST(GroupMask, DenseRelabeling) {
  const GroupMask m(4, 1, {0, 255, 7, 255}, {{7, "cat"}});
  EXPECT_EQ(m.group_count(), 3);
  EXPECT_EQ(m.at(1, 0), 2);
  EXPECT_EQ(m.at(2, 0), 1);
  EXPECT_EQ(m.labels().at(0), "background");
  EXPECT_EQ(m.labels().at(1), "cat");
  EXPECT_EQ(m.labels().at(2), "object2");
  EXPECT_EQ(m.find_label("CAT"), (std::set<uint16_t>{1}));
  EXPECT_TRUE(m.find_label("dog").empty());
}

TEST(GroupMask, BinaryMaskGivesTwoGroups) {
  const GroupMask m(2, 1, {0, 255});
  EXPECT_EQ(m.group_count(), 2);
  EXPECT_EQ(m.foreground(), (std::vector<uint8_t>{0, 1}));
}

TEST(TaskProfile, WeightsAtLeastOne) {
  for (int k = 0; k < 6; ++k) {
    const auto p = TaskProfile::for_kind(static_cast<TaskKind>(k));
    for (float w : p.quant_weights) EXPECT_GE(w, 1.0f);
  }
  for (float w : TaskProfile::for_kind(TaskKind::kDistortion).quant_weights) {
    EXPECT_EQ(w, 1.0f);
  }
  const auto perception = TaskProfile::for_kind(TaskKind::kPerception);
  EXPECT_GT(perception.quant_weights[63], perception.quant_weights[0]);
}

TEST(TaskKind, NamesRoundTrip) {
  for (int k = 0; k < 6; ++k) {
    const auto kind = static_cast<TaskKind>(k);
    EXPECT_EQ(parse_task(task_name(kind)), kind);
  }
  EXPECT_EQ(task_name(TaskKind::kPoseEstimation), "pose_estimation");
  EXPECT_FALSE(parse_task("captioning").has_value());
}

TEST(AssignBlocks, AllZero) {
  const auto a = assign_blocks(GroupMask(16, 16));
  EXPECT_EQ(a.blocks_x, 2u);
  EXPECT_EQ(a.blocks_y, 2u);
  EXPECT_EQ(a.group_of_block, (std::vector<uint16_t>{0, 0, 0, 0}));
}

TEST(AssignBlocks, LeftHalf) {
  const auto a = assign_blocks(rect_mask(16, 8, 0, 0, 8, 8));
  EXPECT_EQ(a.group_of_block, (std::vector<uint16_t>{1, 0}));
}

TEST(AssignBlocks, TieGoesToLowestId) {
  std::vector<uint16_t> ids(64);
  for (int i = 0; i < 64; ++i) ids[i] = i < 32 ? 5 : 2;
  const GroupMask m(8, 8, ids);
  // Raw 2 and 5 become dense 1 and 2 (0 is always present).
  const auto a = assign_blocks(m);
  EXPECT_EQ(a.group_of_block[0], 1);
  EXPECT_EQ(m.labels().at(1), "object1");
}

TEST(AssignBlocks, PartialBlocksCeil) {
  const auto a = assign_blocks(GroupMask(17, 9));
  EXPECT_EQ(a.blocks_x, 3u);
  EXPECT_EQ(a.blocks_y, 2u);
}

TEST(AssignBlocks, MatchesOracle) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const uint32_t w = 1 + rng() % 60, h = 1 + rng() % 60;
    const GroupMask m = random_mask(rng, w, h, 1 + static_cast<int>(rng() % 5));
    ASSERT_EQ(assign_blocks(m).group_of_block, majority_oracle(m));
  }
}

TEST(Dct, MatchesNaiveOracle) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<float> d(-128.0f, 127.0f);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<float, 64> block;
    for (auto& v : block) v = d(rng);
    const auto expect = naive_dct(block);
    forward_dct8x8(block);
    for (int i = 0; i < 64; ++i) ASSERT_NEAR(block[i], expect[i], 1e-3);
  }
}

TEST(Dct, RoundTripWithinTolerance) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<float> d(-128.0f, 127.0f);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<float, 64> block, orig;
    for (auto& v : block) v = d(rng);
    orig = block;
    forward_dct8x8(block);
    inverse_dct8x8(block);
    for (int i = 0; i < 64; ++i) ASSERT_NEAR(block[i], orig[i], 1e-3);
  }
}

TEST(Zigzag, IsPermutation) {
  std::set<int> seen(kZigzag.begin(), kZigzag.end());
  EXPECT_EQ(seen.size(), 64u);
  EXPECT_EQ(kZigzag[0], 0);
  EXPECT_EQ(kZigzag[1], 1);
  EXPECT_EQ(kZigzag[2], 8);
  EXPECT_EQ(kZigzag[63], 63);
}

TEST(Encode, UniformGrayExactAtTopQuality) {
  const auto img = filled_image(24, 16, 3, 128);
  const auto c = encode(img, QualityMap(24, 16, 1.0f), GroupMask(24, 16),
                        TaskProfile::for_kind(TaskKind::kDistortion));
  EXPECT_EQ(decode(c), img);
}

TEST(Encode, ConstantBlocksExactForAnyLevel) {
  for (int v : {0, 17, 200, 255}) {
    const auto img = filled_image(13, 11, 1, static_cast<uint8_t>(v));
    const auto c = encode(img, QualityMap(13, 11, 1.0f), GroupMask(13, 11),
                          TaskProfile::for_kind(TaskKind::kDistortion));
    EXPECT_EQ(decode(c), img) << v;
  }
}

TEST(Encode, Deterministic) {
  std::mt19937 rng(1);
  const auto img = smooth_image(rng, 40, 33);
  const auto mask = rect_mask(40, 33, 5, 5, 30, 20);
  const QualityMap q(40, 33, 0.6f);
  const auto profile = TaskProfile::for_kind(TaskKind::kPerception);
  EXPECT_EQ(container::serialize(encode(img, q, mask, profile)),
            container::serialize(encode(img, q, mask, profile)));
}

TEST(Encode, DimensionMismatch) {
  const auto img = filled_image(16, 16, 3, 9);
  const auto profile = TaskProfile::for_kind(TaskKind::kDistortion);
  EXPECT_COMPX_ERROR(encode(img, QualityMap(16, 8, 0.5f), GroupMask(16, 16), profile),
                     ErrorCode::kDimensionMismatch);
  EXPECT_COMPX_ERROR(encode(img, QualityMap(16, 16, 0.5f), GroupMask(8, 16), profile),
                     ErrorCode::kDimensionMismatch);
}

TEST(Encode, RateMonotoneInUniformQuality) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 4; ++trial) {
    const auto img = trial % 2 ? random_image(rng, 48, 40) : smooth_image(rng, 48, 40);
    size_t prev = 0;
    for (int i = 0; i <= 20; ++i) {
      const float q = static_cast<float>(i) / 20.0f;
      const size_t bytes = container::serialized_size(
          encode(img, QualityMap(48, 40, q), GroupMask(48, 40),
                 TaskProfile::for_kind(TaskKind::kDistortion)));
      ASSERT_GE(bytes, prev) << "q=" << q;
      prev = bytes;
    }
  }
}

TEST(Encode, HeaderReflectsMask) {
  std::mt19937 rng(2);
  const auto img = smooth_image(rng, 32, 32);
  const auto c = encode(img, QualityMap(32, 32, 0.5f), rect_mask(32, 32, 0, 0, 16, 32, "cat"),
                        TaskProfile::for_kind(TaskKind::kDetection));
  ASSERT_EQ(c.header.groups.size(), 2u);
  EXPECT_EQ(c.header.groups[1].label, "cat");
  EXPECT_EQ(c.header.groups[0].block_count, 8u);
  EXPECT_EQ(c.header.groups[1].block_count, 8u);
  EXPECT_EQ(c.header.profile_kind, static_cast<uint8_t>(TaskKind::kDetection));
  EXPECT_EQ(c.header.colorspace, container::ColorSpace::kYCbCr601);
}

TEST(Encode, ZeroBlockGroupKeepsEntry) {
  // Group 1 covers 4 pixels of a block otherwise owned by group 0.
  const auto c = encode(filled_image(8, 8, 1, 50), QualityMap(8, 8, 0.5f),
                        rect_mask(8, 8, 0, 0, 2, 2), TaskProfile::for_kind(TaskKind::kDistortion));
  ASSERT_EQ(c.header.groups.size(), 2u);
  EXPECT_EQ(c.header.groups[1].block_count, 0u);
  EXPECT_EQ(c.header.groups[1].payload_len, 0u);
  EXPECT_EQ(c.header.colorspace, container::ColorSpace::kGray);
}

TEST(Decode, AllEqualsFullSet) {
  std::mt19937 rng(3);
  const auto img = smooth_image(rng, 37, 29);
  const auto c = encode(img, QualityMap(37, 29, 0.4f), random_mask(rng, 37, 29, 3),
                        TaskProfile::for_kind(TaskKind::kDistortion));
  EXPECT_EQ(decode(c), decode(c, c.group_ids()));
}

TEST(Decode, OmittedGroupsAreGray) {
  std::mt19937 rng(6);
  const auto img = random_image(rng, 32, 24);
  const auto mask = rect_mask(32, 24, 8, 8, 24, 16);
  const auto c = encode(img, QualityMap(32, 24, 0.7f), mask,
                        TaskProfile::for_kind(TaskKind::kDistortion));
  const auto out = decode(c, std::set<uint16_t>{1});
  const auto blocks = assign_blocks(mask);
  for (uint32_t y = 0; y < 24; ++y) {
    for (uint32_t x = 0; x < 32; ++x) {
      if (blocks.group_of_block[(y / 8) * blocks.blocks_x + x / 8] != 0) continue;
      for (uint32_t ch = 0; ch < 3; ++ch) ASSERT_EQ(out.at(x, y, ch), 128);
    }
  }
}

TEST(Decode, UnknownGroup) {
  const auto c = encode(filled_image(8, 8, 3, 1), QualityMap(8, 8, 0.5f), GroupMask(8, 8),
                        TaskProfile::for_kind(TaskKind::kDistortion));
  EXPECT_COMPX_ERROR(decode(c, std::set<uint16_t>{4}), ErrorCode::kUnknownGroup);
}

TEST(Decode, CorruptSegment) {
  std::mt19937 rng(12);
  const auto img = random_image(rng, 16, 16);
  auto c = encode(img, QualityMap(16, 16, 0.9f), GroupMask(16, 16),
                  TaskProfile::for_kind(TaskKind::kDistortion));
  // Zero-filled payload decodes as an endless Exp-Golomb prefix.
  std::fill(c.segments[0].begin(), c.segments[0].end(), 0);
  EXPECT_COMPX_ERROR(decode(c), ErrorCode::kCorruptSegment);
  c.segments[0].assign(c.segments[0].size(), 0xff);
  EXPECT_COMPX_ERROR(decode(c), ErrorCode::kCorruptSegment);
}

TEST(Decode, GroupIndependenceProperty) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const uint32_t w = 8 + rng() % 56, h = 8 + rng() % 56;
    const uint32_t ch = trial % 3 == 0 ? 1 : 3;
    const auto img = trial % 2 ? random_image(rng, w, h, ch) : smooth_image(rng, w, h, ch);
    std::vector<float> qv(size_t{w} * h);
    std::uniform_real_distribution<float> qd(0.0f, 1.0f);
    for (auto& v : qv) v = qd(rng);
    const auto mask = random_mask(rng, w, h, 1 + static_cast<int>(rng() % 4));
    const auto c = encode(img, QualityMap(w, h, qv), mask,
                          TaskProfile::for_kind(static_cast<TaskKind>(trial % 6)));
    const auto ids = c.group_ids();
    for (uint16_t g : ids) {
      const std::set<uint16_t> sel{g};
      ASSERT_EQ(decode(container::extract(c, sel), sel), decode(c, sel));
    }
    if (ids.size() > 2) {
      std::set<uint16_t> sel(ids.begin(), std::next(ids.begin(), 2));
      ASSERT_EQ(decode(container::extract(c, sel), sel), decode(c, sel));
    }
  }
}

TEST(Decode, HigherQualityReconstructsBetter) {
  std::mt19937 rng(31);
  const auto img = smooth_image(rng, 64, 48);
  const auto profile = TaskProfile::for_kind(TaskKind::kDistortion);
  const double lo = metrics::psnr(img, decode(encode(img, QualityMap(64, 48, 0.2f),
                                                     GroupMask(64, 48), profile)));
  const double hi = metrics::psnr(img, decode(encode(img, QualityMap(64, 48, 0.9f),
                                                     GroupMask(64, 48), profile)));
  EXPECT_GT(hi, lo);
  EXPECT_GT(hi, 40.0);
}

TEST(Decode, RoiQualityMapFavorsRoi) {
  std::mt19937 rng(17);
  const auto img = random_image(rng, 32, 32);
  const auto mask = rect_mask(32, 32, 0, 0, 16, 32);
  std::vector<float> qv(32 * 32);
  for (uint32_t y = 0; y < 32; ++y) {
    for (uint32_t x = 0; x < 32; ++x) qv[y * 32 + x] = x < 16 ? 0.9f : 0.1f;
  }
  const auto out = decode(encode(img, QualityMap(32, 32, qv), mask,
                                 TaskProfile::for_kind(TaskKind::kDistortion)));
  const auto fg = mask.foreground();
  const double roi = metrics::weighted_psnr(img, out, fg, {1.0, 0.0});
  const double non = metrics::weighted_psnr(img, out, fg, {0.0, 1.0});
  EXPECT_GT(roi, non + 10.0);
}

}  // namespace
}  // namespace compx::codec
