// Copyright 2026 The SafeAug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SAFEAUG_ERROR_HPP
#define SAFEAUG_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace safeaug {

/// Failure categories raised across the library. The CLI maps these onto exit codes.
enum class ErrorCode {
  kMissingKey,
  kMalformedMatrix,
  kTooFewFields,
  kNonNumericField,
  kMalformedRecord,
  kUnreadableFile,
  kDimensionMismatch,
  kEmptyCorpus,
  kCountMismatch,
  kMalformedDetection,
  kNonPositiveDepth,
  kEmptySegment,
  kDegenerateShift,
  kInvalidConfig,
  kTooFewRecords,
  kInsufficientRare,
  kDegenerateRange,
  kNoFrontVehicleRecords,
  kLengthMismatch,
  kEmptyInput,
  kSingularSystem,
  kMissingPrediction,
  kInvalidManifest,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingKey: return "MissingKey";
    case ErrorCode::kMalformedMatrix: return "MalformedMatrix";
    case ErrorCode::kTooFewFields: return "TooFewFields";
    case ErrorCode::kNonNumericField: return "NonNumericField";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kUnreadableFile: return "UnreadableFile";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kMalformedDetection: return "MalformedDetection";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kEmptySegment: return "EmptySegment";
    case ErrorCode::kDegenerateShift: return "DegenerateShift";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kTooFewRecords: return "TooFewRecords";
    case ErrorCode::kInsufficientRare: return "InsufficientRare";
    case ErrorCode::kDegenerateRange: return "DegenerateRange";
    case ErrorCode::kNoFrontVehicleRecords: return "NoFrontVehicleRecords";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kMissingPrediction: return "MissingPrediction";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace safeaug

#endif  // SAFEAUG_ERROR_HPP
