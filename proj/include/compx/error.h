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

#ifndef COMPX_ERROR_H_
#define COMPX_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace compx {

// Every failure surfaced by the library carries one of these codes. The
// names are part of the external surface: the CLI prints them and the HTTP
// service returns them in ApiError bodies.
enum class ErrorCode {
  // imaging
  kNotFound,
  kUnsupportedFormat,
  kCorruptFile,
  kIoError,
  kChannelMismatch,
  // codec / container
  kOutOfRange,
  kDimensionMismatch,
  kUnknownGroup,
  kCorruptSegment,
  kInvariantViolation,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kInconsistentHeader,
  kEmptySelection,
  // metrics
  kNonBinaryMask,
  kZeroDims,
  kNoOverlap,
  kDegenerateCurve,
  kCurveNonMonotone,
  // plan
  kNoJsonFound,
  kUnknownField,
  kInvalidEnum,
  kRatioSumViolation,
  kNonPositive,
  kMissingRuns,
  // prompts
  kMissingFile,
  kInvalidTranscript,
  kEmptyHistory,
  // llm client
  kAuthMissing,
  kHttpError,
  kEmptyCompletion,
  kScriptExhausted,
  // segmenter
  kRangeViolation,
  kProviderError,
  // agent
  kPlanningFailed,
  kSegmentationRequired,
  kLabelNotFound,
  kNoWindow,
  kNoProposalFound,
  // bench
  kDuplicateId,
  kBadDifficulty,
  kLabelParseError,
  // cli
  kConfigError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  std::string_view name() const { return error_code_name(code_); }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace compx

#endif  // COMPX_ERROR_H_
