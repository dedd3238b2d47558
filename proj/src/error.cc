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

#include "compx/error.h"

namespace compx {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnknownGroup: return "UnknownGroup";
    case ErrorCode::kCorruptSegment: return "CorruptSegment";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kInconsistentHeader: return "InconsistentHeader";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kNonBinaryMask: return "NonBinaryMask";
    case ErrorCode::kZeroDims: return "ZeroDims";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kDegenerateCurve: return "DegenerateCurve";
    case ErrorCode::kCurveNonMonotone: return "CurveNonMonotone";
    case ErrorCode::kNoJsonFound: return "NoJsonFound";
    case ErrorCode::kUnknownField: return "UnknownField";
    case ErrorCode::kInvalidEnum: return "InvalidEnum";
    case ErrorCode::kRatioSumViolation: return "RatioSumViolation";
    case ErrorCode::kNonPositive: return "NonPositive";
    case ErrorCode::kMissingRuns: return "MissingRuns";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kInvalidTranscript: return "InvalidTranscript";
    case ErrorCode::kEmptyHistory: return "EmptyHistory";
    case ErrorCode::kAuthMissing: return "AuthMissing";
    case ErrorCode::kHttpError: return "HttpError";
    case ErrorCode::kEmptyCompletion: return "EmptyCompletion";
    case ErrorCode::kScriptExhausted: return "ScriptExhausted";
    case ErrorCode::kRangeViolation: return "RangeViolation";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kPlanningFailed: return "PlanningFailed";
    case ErrorCode::kSegmentationRequired: return "SegmentationRequired";
    case ErrorCode::kLabelNotFound: return "LabelNotFound";
    case ErrorCode::kNoWindow: return "NoWindow";
    case ErrorCode::kNoProposalFound: return "NoProposalFound";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kBadDifficulty: return "BadDifficulty";
    case ErrorCode::kLabelParseError: return "LabelParseError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace compx
