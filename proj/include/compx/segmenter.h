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


#ifndef COMPX_SEGMENTER_H_
#define COMPX_SEGMENTER_H_

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "compx/codec.h"
#include "compx/imaging.h"

// Group masks for RoI coding and partial transmission.
namespace compx::segment {

enum class SourceKind { kFile, kHeuristic, kRemote };

struct MaskSource {
  SourceKind kind = SourceKind::kHeuristic;
  // Mask path (file) or provider base URL (remote).
  std::string locator;
};

// Grayscale PGM/PNG. Value 0 is the background; every other value becomes
// its own group, numbered in ascending value order. `labels` is keyed by
// source value. Errors: DimensionMismatch, UnsupportedFormat, NotFound.
codec::GroupMask mask_from_file(const std::filesystem::path& path, uint32_t width,
                                uint32_t height,
                                const std::map<uint16_t, std::string>& labels = {});

// Sobel magnitude on luma, Otsu threshold, largest 4-connected component;
// its filled bounding box becomes group 1 labeled `label`. Falls back to a
// centered box of half the image area when the component covers under 2%
// or over 98% of the pixels.
codec::GroupMask heuristic_foreground(const imaging::ImageBuffer& image,
                                      const std::string& label = "foreground");

// Nonzero groups get q_roi, the background q_bg. Requires
// 0 <= q_bg <= q_roi <= 1, else RangeViolation.
codec::QualityMap quality_map_from_mask(const codec::GroupMask& mask, float q_roi, float q_bg);

// Groups in `roi` get q_roi, everything else q_other; both in [0, 1]
// (RangeViolation) but unordered.
codec::QualityMap quality_map_for_groups(const codec::GroupMask& mask,
                                         const std::set<uint16_t>& roi, float q_roi,
                                         float q_other);

// Client for POST <base>/segment, multipart {image: PNG, phrase: text},
// answered with a grayscale mask PNG.
class RemoteSegmenter {
 public:
  using Sleeper = std::function<void(double seconds)>;
  explicit RemoteSegmenter(std::string base_url, int max_retries = 3, double timeout_s = 60.0,
                           double backoff_base_s = 1.0);
  RemoteSegmenter(std::string base_url, int max_retries, double timeout_s,
                  double backoff_base_s, Sleeper sleeper);

  // Nonzero groups are labeled with `phrase`. Throws ProviderError.
  codec::GroupMask segment(const imaging::ImageBuffer& image, const std::string& phrase) const;

 private:
  std::string base_url_;
  int max_retries_;
  double timeout_s_;
  double backoff_base_s_;
  Sleeper sleep_;
};

// Dispatches on `source.kind`. The heuristic labels its group `phrase`.
// Throws InvariantViolation when a file or remote source has no locator.
codec::GroupMask acquire_mask(const MaskSource& source, const imaging::ImageBuffer& image,
                              const std::string& phrase);

}  // namespace compx::segment

#endif  // COMPX_SEGMENTER_H_
