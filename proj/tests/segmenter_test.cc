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

#include <thread>

#include "httplib.h"
#include "test_util.h"

namespace compx::segment {
namespace {

using compx::testing::TempDir;
using imaging::ImageBuffer;

ImageBuffer square_canvas(uint32_t size, uint32_t x0, uint32_t y0, uint32_t side) {
  ImageBuffer img = compx::testing::filled_image(size, size, 3, 0);
  for (uint32_t y = y0; y < y0 + side; ++y) {
    for (uint32_t x = x0; x < x0 + side; ++x) {
      for (uint32_t c = 0; c < 3; ++c) img.at(x, y, c) = 255;
    }
  }
  return img;
}

// Bounding box of group 1 as {x0, y0, x1, y1}; also checks it is filled.
std::array<uint32_t, 4> group1_box(const codec::GroupMask& m) {
  uint32_t x0 = m.width(), y0 = m.height(), x1 = 0, y1 = 0;
  size_t count = 0;
  for (uint32_t y = 0; y < m.height(); ++y) {
    for (uint32_t x = 0; x < m.width(); ++x) {
      if (m.at(x, y) != 1) continue;
      ++count;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x + 1);
      y1 = std::max(y1, y + 1);
    }
  }
  EXPECT_EQ(count, size_t{x1 - x0} * (y1 - y0)) << "group 1 is not a filled box";
  return {x0, y0, x1, y1};
}

TEST(MaskFromFile, BinaryMask) {
  TempDir tmp;
  ImageBuffer m = compx::testing::filled_image(8, 4, 1, 0);
  m.at(2, 1) = 255;
  imaging::save_image(m, tmp / "m.png");
  const codec::GroupMask g = mask_from_file(tmp / "m.png", 8, 4);
  EXPECT_EQ(g.group_count(), 2);
  EXPECT_EQ(g.at(2, 1), 1);
  EXPECT_EQ(g.at(0, 0), 0);
  EXPECT_EQ(g.labels().at(0), "background");
}

TEST(MaskFromFile, AscendingRelabel) {
  TempDir tmp;
  ImageBuffer m = compx::testing::filled_image(4, 1, 1, 0);
  m.at(1, 0) = 200;
  m.at(2, 0) = 10;
  m.at(3, 0) = 200;
  imaging::save_image(m, tmp / "m.pgm");
  const codec::GroupMask g = mask_from_file(tmp / "m.pgm", 4, 1, {{200, "cat"}});
  EXPECT_EQ(g.group_count(), 3);
  EXPECT_EQ(g.at(2, 0), 1);
  EXPECT_EQ(g.at(1, 0), 2);
  EXPECT_EQ(g.at(3, 0), 2);
  EXPECT_EQ(g.labels().at(2), "cat");
}

TEST(MaskFromFile, Errors) {
  TempDir tmp;
  imaging::save_image(compx::testing::filled_image(8, 8, 1, 0), tmp / "m.png");
  EXPECT_COMPX_ERROR(mask_from_file(tmp / "m.png", 8, 9), ErrorCode::kDimensionMismatch);
  imaging::save_image(compx::testing::filled_image(8, 8, 3, 0), tmp / "rgb.png");
  EXPECT_COMPX_ERROR(mask_from_file(tmp / "rgb.png", 8, 8), ErrorCode::kUnsupportedFormat);
  EXPECT_COMPX_ERROR(mask_from_file(tmp / "none.png", 8, 8), ErrorCode::kNotFound);
}

TEST(Heuristic, UniformImageFallsBackToCenteredHalf) {
  const auto g = heuristic_foreground(compx::testing::filled_image(40, 20, 3, 90));
  const auto box = group1_box(g);
  const double area = double(box[2] - box[0]) * (box[3] - box[1]);
  EXPECT_NEAR(area / 800.0, 0.5, 0.03);
  EXPECT_EQ(box[0] + box[2], 40u);
  EXPECT_EQ(box[1] + box[3], 20u);
  EXPECT_EQ(g.labels().at(1), "foreground");
}

TEST(Heuristic, WhiteSquareOnBlack) {
  // The gradient ring straddles the square's edge by one pixel on each
  // side, so the box is the square grown by one pixel.
  const auto g = heuristic_foreground(square_canvas(64, 20, 12, 16), "square");
  EXPECT_EQ(group1_box(g), (std::array<uint32_t, 4>{19, 11, 37, 29}));
  EXPECT_EQ(g.labels().at(1), "square");
  EXPECT_EQ(g.group_count(), 2);
}

TEST(Heuristic, LargestComponentWins) {
  ImageBuffer img = square_canvas(96, 4, 4, 8);
  for (uint32_t y = 50; y < 80; ++y) {
    for (uint32_t x = 40; x < 70; ++x) {
      for (uint32_t c = 0; c < 3; ++c) img.at(x, y, c) = 255;
    }
  }
  const auto box = group1_box(heuristic_foreground(img));
  EXPECT_EQ(box, (std::array<uint32_t, 4>{39, 49, 71, 81}));
}

TEST(Heuristic, TinyComponentFallsBack) {
  const auto box = group1_box(heuristic_foreground(square_canvas(200, 10, 10, 2)));
  // 200 * sqrt(0.5) rounds to 141; the odd margin leaves one extra column right.
  EXPECT_EQ(box, (std::array<uint32_t, 4>{29, 29, 170, 170}));
}

TEST(Heuristic, Deterministic) {
  std::mt19937 rng(5);
  const ImageBuffer img = compx::testing::smooth_image(rng, 70, 45);
  const auto a = heuristic_foreground(img);
  const auto b = heuristic_foreground(img);
  EXPECT_TRUE(std::equal(a.ids().begin(), a.ids().end(), b.ids().begin(), b.ids().end()));
}

TEST(QualityMap, TwoLevels) {
  const auto mask = compx::testing::rect_mask(8, 8, 0, 0, 4, 8);
  const auto q = quality_map_from_mask(mask, 0.8f, 0.3f);
  EXPECT_FLOAT_EQ(q.at(1, 1), 0.8f);
  EXPECT_FLOAT_EQ(q.at(6, 1), 0.3f);
  std::set<float> levels(q.values().begin(), q.values().end());
  EXPECT_EQ(levels.size(), 2u);
}

TEST(QualityMap, EqualLevelsUniform) {
  const auto q = quality_map_from_mask(compx::testing::rect_mask(8, 8, 0, 0, 4, 8), 0.5f, 0.5f);
  for (float v : q.values()) EXPECT_FLOAT_EQ(v, 0.5f);
}

TEST(QualityMap, Violations) {
  const auto mask = compx::testing::rect_mask(8, 8, 0, 0, 4, 8);
  EXPECT_COMPX_ERROR(quality_map_from_mask(mask, 0.3f, 0.8f), ErrorCode::kRangeViolation);
  EXPECT_COMPX_ERROR(quality_map_from_mask(mask, 1.2f, 0.1f), ErrorCode::kRangeViolation);
  EXPECT_COMPX_ERROR(quality_map_for_groups(mask, {1}, 0.5f, -0.1f),
                     ErrorCode::kRangeViolation);
  const auto q = quality_map_for_groups(mask, {0}, 0.2f, 0.9f);
  EXPECT_FLOAT_EQ(q.at(6, 1), 0.2f);
  EXPECT_FLOAT_EQ(q.at(1, 1), 0.9f);
}

class MaskProvider {
 public:
  explicit MaskProvider(int status) : status_(status) {
    server_.Post("/api/segment", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      if (status_ != 200) {
        res.status = status_;
        return;
      }
      phrase_ = req.get_file_value("phrase").content;
      const std::string& png = req.get_file_value("image").content;
      const ImageBuffer img = imaging::decode_image(
          std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(png.data()), png.size()));
      ImageBuffer mask = compx::testing::filled_image(img.width(), img.height(), 1, 0);
      mask.at(0, 0) = 9;
      const auto out = imaging::encode_png(mask);
      res.set_content(std::string(out.begin(), out.end()), "image/png");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MaskProvider() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }
  int hits() const { return hits_; }
  const std::string& phrase() const { return phrase_; }

 private:
  int status_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::string phrase_;
};

TEST(Remote, MaskLabeledWithPhrase) {
  MaskProvider provider(200);
  RemoteSegmenter seg(provider.url(), 0, 5.0, 0.0, [](double) {});
  const auto g = seg.segment(compx::testing::filled_image(6, 5, 3, 10), "screen");
  EXPECT_EQ(provider.phrase(), "screen");
  EXPECT_EQ(g.width(), 6u);
  EXPECT_EQ(g.at(0, 0), 1);
  EXPECT_EQ(g.labels().at(1), "screen");
}

TEST(Remote, FailureIsProviderError) {
  MaskProvider provider(500);
  int sleeps = 0;
  RemoteSegmenter seg(provider.url(), 2, 5.0, 0.0, [&](double) { ++sleeps; });
  EXPECT_COMPX_ERROR(seg.segment(compx::testing::filled_image(6, 5, 3, 10), "x"),
                     ErrorCode::kProviderError);
  EXPECT_EQ(provider.hits(), 3);
  EXPECT_EQ(sleeps, 2);
}

TEST(Remote, ClientErrorNotRetried) {
  MaskProvider provider(404);
  RemoteSegmenter seg(provider.url(), 2, 5.0, 0.0, [](double) {});
  EXPECT_COMPX_ERROR(seg.segment(compx::testing::filled_image(6, 5, 3, 10), "x"),
                     ErrorCode::kProviderError);
  EXPECT_EQ(provider.hits(), 1);
}

TEST(Acquire, Dispatch) {
  const ImageBuffer img = square_canvas(64, 20, 12, 16);
  const auto g = acquire_mask({SourceKind::kHeuristic, ""}, img, "box");
  EXPECT_EQ(g.labels().at(1), "box");
  EXPECT_COMPX_ERROR(acquire_mask({SourceKind::kFile, ""}, img, "x"),
                     ErrorCode::kInvariantViolation);
  EXPECT_COMPX_ERROR(acquire_mask({SourceKind::kRemote, ""}, img, "x"),
                     ErrorCode::kInvariantViolation);
}

}  // namespace
}  // namespace compx::segment
