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

#include "compx/imaging.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "compx/error.h"

namespace compx::imaging {

namespace {

void check_geometry(uint32_t width, uint32_t height, uint32_t channels) {
  if (width == 0 || height == 0 || width > kMaxDimension ||
      height > kMaxDimension) {
    throw Error(ErrorCode::kInvariantViolation,
                "image dimensions " + std::to_string(width) + "x" +
                    std::to_string(height) + " outside [1, 16384]");
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::kInvariantViolation,
                "channel count must be 1 or 3, got " + std::to_string(channels));
  }
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

// Minimal cursor over a PNM header: whitespace and '#' comments between
// tokens, exactly one whitespace byte before the raster.
class PnmHeader {
 public:
  explicit PnmHeader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint32_t next_uint() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorCode::kCorruptFile, "malformed PNM header");
    }
    uint64_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1'000'000) {
        throw Error(ErrorCode::kCorruptFile, "PNM header value too large");
      }
    }
    return static_cast<uint32_t>(value);
  }

  size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::kCorruptFile, "PNM header not terminated");
    }
    return pos_ + 1;
  }

  void skip(size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

ImageBuffer decode_pnm(std::span<const uint8_t> bytes, uint32_t channels) {
  PnmHeader header(bytes);
  header.skip(2);
  const uint32_t width = header.next_uint();
  const uint32_t height = header.next_uint();
  const uint32_t maxval = header.next_uint();
  if (maxval > 255) {
    throw Error(ErrorCode::kUnsupportedFormat, "16-bit PNM is not supported");
  }
  if (maxval != 255) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "PNM maxval must be 255, got " + std::to_string(maxval));
  }
  if (width == 0 || height == 0 || width > kMaxDimension ||
      height > kMaxDimension) {
    throw Error(ErrorCode::kCorruptFile, "PNM dimensions out of range");
  }
  const size_t offset = header.raster_offset();
  const size_t need = size_t{width} * height * channels;
  if (bytes.size() < offset || bytes.size() - offset < need) {
    throw Error(ErrorCode::kCorruptFile, "PNM raster truncated");
  }
  std::vector<uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                            bytes.begin() +
                                static_cast<std::ptrdiff_t>(offset + need));
  return ImageBuffer(width, height, channels, std::move(data));
}

ImageBuffer decode_png(std::span<const uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kCorruptFile, "PNG: " + msg);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, "16-bit PNG is not supported");
  }
  if (image.width == 0 || image.height == 0 || image.width > kMaxDimension ||
      image.height > kMaxDimension) {
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, "PNG dimensions out of range");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const uint32_t channels = color ? 3 : 1;
  std::vector<uint8_t> data(PNG_IMAGE_SIZE(image));
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, data.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kCorruptFile, "PNG: " + msg);
  }
  return ImageBuffer(image.width, image.height, channels, std::move(data));
}

std::vector<uint8_t> encode_pnm(const ImageBuffer& image, bool color) {
  const std::string header = std::string(color ? "P6" : "P5") + "\n" +
                             std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.data().begin(), image.data().end());
  return out;
}

uint8_t clamp_u8(float v) {
  return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

ImageBuffer::ImageBuffer(uint32_t width, uint32_t height, uint32_t channels)
    : width_(width), height_(height), channels_(channels) {
  check_geometry(width, height, channels);
  data_.assign(size_t{width} * height * channels, 0);
}

ImageBuffer::ImageBuffer(uint32_t width, uint32_t height, uint32_t channels,
                         std::vector<uint8_t> data)
    : width_(width), height_(height), channels_(channels),
      data_(std::move(data)) {
  check_geometry(width, height, channels);
  if (data_.size() != size_t{width} * height * channels) {
    throw Error(ErrorCode::kInvariantViolation,
                "sample count does not match width*height*channels");
  }
}

ImageBuffer decode_image(std::span<const uint8_t> bytes) {
  static constexpr uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    if (bytes[1] == '6') return decode_pnm(bytes, 3);
    if (bytes[1] == '5') return decode_pnm(bytes, 1);
    if (bytes[1] >= '1' && bytes[1] <= '7') {
      throw Error(ErrorCode::kUnsupportedFormat, "only binary P5/P6 PNM supported");
    }
  }
  throw Error(ErrorCode::kCorruptFile, "unrecognized image magic");
}

ImageBuffer load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_image(bytes);
}

std::vector<uint8_t> encode_png(const ImageBuffer& image) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = image.width();
  png.height = image.height();
  png.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.data().data(),
                                 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("PNG encode: ") + png.message);
  }
  std::vector<uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0,
                                 image.data().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("PNG encode: ") + png.message);
  }
  out.resize(size);
  return out;
}

void save_image(const ImageBuffer& image, const std::filesystem::path& path,
                FileFormat format) {
  switch (format) {
    case FileFormat::kPng:
      write_file(path, encode_png(image));
      return;
    case FileFormat::kPpm:
      if (image.channels() != 3) {
        throw Error(ErrorCode::kChannelMismatch, "PPM needs 3 channels");
      }
      write_file(path, encode_pnm(image, true));
      return;
    case FileFormat::kPgm:
      if (image.channels() != 1) {
        throw Error(ErrorCode::kChannelMismatch, "PGM needs 1 channel");
      }
      write_file(path, encode_pnm(image, false));
      return;
  }
}

void save_image(const ImageBuffer& image, const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ppm") return save_image(image, path, FileFormat::kPpm);
  if (ext == ".pgm") return save_image(image, path, FileFormat::kPgm);
  if (ext == ".png") return save_image(image, path, FileFormat::kPng);
  throw Error(ErrorCode::kUnsupportedFormat, "unknown extension " + ext);
}

PlanarF32 rgb_to_ycbcr(const ImageBuffer& image) {
  if (image.channels() != 3) {
    throw Error(ErrorCode::kChannelMismatch, "rgb_to_ycbcr needs 3 channels");
  }
  PlanarF32 out;
  out.width = image.width();
  out.height = image.height();
  const size_t n = image.pixel_count();
  out.y.resize(n);
  out.cb.resize(n);
  out.cr.resize(n);
  const auto px = image.data();
  for (size_t i = 0; i < n; ++i) {
    const float r = px[3 * i], g = px[3 * i + 1], b = px[3 * i + 2];
    const float y = 0.299f * r + 0.587f * g + 0.114f * b;
    out.y[i] = y;
    out.cb[i] = 128.0f + (b - y) * 0.564f;
    out.cr[i] = 128.0f + (r - y) * 0.713f;
  }
  return out;
}

ImageBuffer ycbcr_to_rgb(const PlanarF32& planar) {
  ImageBuffer out(planar.width, planar.height, 3);
  auto px = out.data();
  const size_t n = size_t{planar.width} * planar.height;
  for (size_t i = 0; i < n; ++i) {
    const float y = planar.y[i];
    const float cb = planar.cb[i] - 128.0f;
    const float cr = planar.cr[i] - 128.0f;
    // Exact inverses of the forward scale factors.
    const float r = y + cr / 0.713f;
    const float b = y + cb / 0.564f;
    const float g = (y - 0.299f * r - 0.114f * b) / 0.587f;
    px[3 * i] = clamp_u8(r);
    px[3 * i + 1] = clamp_u8(g);
    px[3 * i + 2] = clamp_u8(b);
  }
  return out;
}

std::vector<float> luma(const ImageBuffer& image) {
  std::vector<float> out(image.pixel_count());
  const auto px = image.data();
  if (image.channels() == 1) {
    for (size_t i = 0; i < out.size(); ++i) out[i] = px[i];
  } else {
    for (size_t i = 0; i < out.size(); ++i) {
      out[i] = 0.299f * px[3 * i] + 0.587f * px[3 * i + 1] + 0.114f * px[3 * i + 2];
    }
  }
  return out;
}

}  // namespace compx::imaging
