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

#ifndef COMPX_BITIO_H_
#define COMPX_BITIO_H_

#include <cstdint>
#include <span>
#include <vector>

#include "compx/error.h"

namespace compx::codec {

// MSB-first bit packing with order-0 Exp-Golomb codes.
class BitWriter {
 public:
  void put_bit(uint32_t bit) {
    acc_ = static_cast<uint8_t>((acc_ << 1) | (bit & 1));
    if (++filled_ == 8) flush_byte();
  }
  void put_bits(uint32_t value, int count) {
    for (int i = count - 1; i >= 0; --i) put_bit((value >> i) & 1);
  }
  void put_ue(uint32_t value) {
    const uint64_t code = uint64_t{value} + 1;
    int bits = 0;
    while ((code >> bits) > 1) ++bits;
    put_bits(0, bits);
    for (int i = bits; i >= 0; --i) put_bit(static_cast<uint32_t>((code >> i) & 1));
  }
  void put_se(int32_t value) {
    put_ue(value > 0 ? 2 * static_cast<uint32_t>(value) - 1
                     : 2 * static_cast<uint32_t>(-static_cast<int64_t>(value)));
  }
  // Pads the last partial byte with zero bits.
  std::vector<uint8_t> finish() {
    if (filled_ > 0) {
      acc_ = static_cast<uint8_t>(acc_ << (8 - filled_));
      flush_byte();
    }
    return std::move(bytes_);
  }

 private:
  void flush_byte() {
    bytes_.push_back(acc_);
    acc_ = 0;
    filled_ = 0;
  }

  std::vector<uint8_t> bytes_;
  uint8_t acc_ = 0;
  int filled_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint32_t get_bit() {
    if (pos_ >= bytes_.size() * 8) {
      throw Error(ErrorCode::kCorruptSegment, "segment exhausted");
    }
    const uint32_t bit = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return bit;
  }
  uint32_t get_ue() {
    int zeros = 0;
    while (get_bit() == 0) {
      if (++zeros > 31) throw Error(ErrorCode::kCorruptSegment, "Exp-Golomb prefix too long");
    }
    uint64_t value = 1;
    for (int i = 0; i < zeros; ++i) value = (value << 1) | get_bit();
    return static_cast<uint32_t>(value - 1);
  }
  int32_t get_se() {
    const uint32_t u = get_ue();
    return (u & 1) ? static_cast<int32_t>((u + 1) / 2)
                   : -static_cast<int32_t>(u / 2);
  }
  size_t bits_left() const { return bytes_.size() * 8 - pos_; }
  // True when only zero padding of the final byte remains.
  bool at_padding() const {
    if (bits_left() >= 8) return false;
    for (size_t p = pos_; p < bytes_.size() * 8; ++p) {
      if ((bytes_[p >> 3] >> (7 - (p & 7))) & 1) return false;
    }
    return true;
  }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace compx::codec

#endif  // COMPX_BITIO_H_
