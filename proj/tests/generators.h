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


#ifndef COMPX_TESTS_GENERATORS_H_
#define COMPX_TESTS_GENERATORS_H_

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "compx/codec.h"
#include "compx/imaging.h"

// Deterministic inputs and scratch space shared by the unit and acceptance
// tests.
namespace compx::testing {

inline imaging::ImageBuffer random_image(std::mt19937& rng, uint32_t w, uint32_t h,
                                         uint32_t channels = 3) {
  imaging::ImageBuffer img(w, h, channels);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : img.data()) v = static_cast<uint8_t>(d(rng));
  return img;
}

// Smooth gradient with mild noise; compresses like a natural photo.
inline imaging::ImageBuffer smooth_image(std::mt19937& rng, uint32_t w, uint32_t h,
                                         uint32_t channels = 3) {
  imaging::ImageBuffer img(w, h, channels);
  std::normal_distribution<float> noise(0.0f, 3.0f);
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      for (uint32_t c = 0; c < channels; ++c) {
        const float base = 40.0f + 150.0f * (static_cast<float>(x) / w) +
                           30.0f * std::sin(0.05f * static_cast<float>(y + 7 * c));
        img.at(x, y, c) = static_cast<uint8_t>(std::clamp(base + noise(rng), 0.0f, 255.0f));
      }
    }
  }
  return img;
}

inline imaging::ImageBuffer filled_image(uint32_t w, uint32_t h, uint32_t channels,
                                         uint8_t value) {
  imaging::ImageBuffer img(w, h, channels);
  std::fill(img.data().begin(), img.data().end(), value);
  return img;
}

// Mask with a filled rectangle of id 1 on background 0.
inline codec::GroupMask rect_mask(uint32_t w, uint32_t h, uint32_t x0, uint32_t y0,
                                  uint32_t x1, uint32_t y1, const std::string& label = "object") {
  std::vector<uint16_t> ids(size_t{w} * h, 0);
  for (uint32_t y = y0; y < y1; ++y) {
    for (uint32_t x = x0; x < x1; ++x) ids[size_t{y} * w + x] = 1;
  }
  return codec::GroupMask(w, h, std::move(ids), {{0, "background"}, {1, label}});
}

inline codec::GroupMask random_mask(std::mt19937& rng, uint32_t w, uint32_t h, int groups) {
  std::vector<uint16_t> ids(size_t{w} * h, 0);
  std::uniform_int_distribution<int> g(0, groups - 1);
  // Random rectangles so groups cover whole blocks as well as partial ones.
  std::uniform_int_distribution<uint32_t> xs(0, w - 1), ys(0, h - 1);
  for (int r = 0; r < 3 * groups; ++r) {
    uint32_t xa = xs(rng), xb = xs(rng), ya = ys(rng), yb = ys(rng);
    if (xa > xb) std::swap(xa, xb);
    if (ya > yb) std::swap(ya, yb);
    const uint16_t id = static_cast<uint16_t>(g(rng));
    for (uint32_t y = ya; y <= yb; ++y) {
      for (uint32_t x = xa; x <= xb; ++x) ids[size_t{y} * w + x] = id;
    }
  }
  return codec::GroupMask(w, h, std::move(ids));
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("compx_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path data_dir() { return COMPX_DATA_DIR; }

}  // namespace compx::testing

#endif  // COMPX_TESTS_GENERATORS_H_
