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

#ifndef COMPX_IMAGING_H_
#define COMPX_IMAGING_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace compx::imaging {

inline constexpr uint32_t kMaxDimension = 16384;

// 8-bit interleaved image, 1 (gray) or 3 (RGB) channels, row-major.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  // Zero-filled buffer. Throws InvariantViolation on bad geometry.
  ImageBuffer(uint32_t width, uint32_t height, uint32_t channels);
  ImageBuffer(uint32_t width, uint32_t height, uint32_t channels,
              std::vector<uint8_t> data);

  uint32_t width() const { return width_; }
  uint32_t height() const { return height_; }
  uint32_t channels() const { return channels_; }
  size_t pixel_count() const { return size_t{width_} * height_; }
  bool empty() const { return data_.empty(); }

  std::span<const uint8_t> data() const { return data_; }
  std::span<uint8_t> data() { return data_; }

  uint8_t at(uint32_t x, uint32_t y, uint32_t c = 0) const {
    return data_[(size_t{y} * width_ + x) * channels_ + c];
  }
  uint8_t& at(uint32_t x, uint32_t y, uint32_t c = 0) {
    return data_[(size_t{y} * width_ + x) * channels_ + c];
  }

  bool operator==(const ImageBuffer&) const = default;

 private:
  uint32_t width_ = 0;
  uint32_t height_ = 0;
  uint32_t channels_ = 0;
  std::vector<uint8_t> data_;
};

// Three float planes (Y, Cb, Cr) of width*height samples each.
struct PlanarF32 {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<float> y, cb, cr;
};

enum class FileFormat { kPng, kPpm, kPgm };

// PNG (8-bit), binary PPM (P6) and binary PGM (P5). The format is sniffed
// from the file's magic bytes, not its extension.
ImageBuffer load_image(const std::filesystem::path& path);
ImageBuffer decode_image(std::span<const uint8_t> bytes);

void save_image(const ImageBuffer& image, const std::filesystem::path& path,
                FileFormat format);
// Picks the format from the extension (.png, .ppm, .pgm).
void save_image(const ImageBuffer& image, const std::filesystem::path& path);
std::vector<uint8_t> encode_png(const ImageBuffer& image);

// BT.601 full range, 4:4:4.
PlanarF32 rgb_to_ycbcr(const ImageBuffer& image);
ImageBuffer ycbcr_to_rgb(const PlanarF32& planar);

// Luma of a gray or RGB buffer as floats.
std::vector<float> luma(const ImageBuffer& image);

}  // namespace compx::imaging

#endif  // COMPX_IMAGING_H_
