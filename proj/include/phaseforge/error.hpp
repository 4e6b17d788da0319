// Copyright 2026 The PhaseForge Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phaseforge {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyTrack,
  kMalformedSegments,
  kBlankInTrack,
  kLengthMismatch,
  kCaseMismatch,
  kNotEnoughAnnotators,
  kResolutionOverreach,
  kMalformedLedger,
  kNoOverlap,
  kUnknownPhase,
  kNotNormalized,
  kMissingConsensus,
  kKeyMismatch,
  kTooFewCases,
  kUnknownCovariate,
  kLogTooShort,
  kDenseIndexViolation,
  kSchemaError,
  kNumericError,
  kNotFound,
  kIoError,
  kConflict,
};

std::string_view error_code_name(ErrorCode code);

// True for errors caused by malformed or unreadable input files rather than
// by domain preconditions on well-formed values.
bool is_io_or_schema_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace phaseforge
