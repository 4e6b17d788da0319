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

#include "phaseforge/error.hpp"

namespace phaseforge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyTrack: return "EmptyTrack";
    case ErrorCode::kMalformedSegments: return "MalformedSegments";
    case ErrorCode::kBlankInTrack: return "BlankInTrack";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kCaseMismatch: return "CaseMismatch";
    case ErrorCode::kNotEnoughAnnotators: return "NotEnoughAnnotators";
    case ErrorCode::kResolutionOverreach: return "ResolutionOverreach";
    case ErrorCode::kMalformedLedger: return "MalformedLedger";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kUnknownPhase: return "UnknownPhase";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kMissingConsensus: return "MissingConsensus";
    case ErrorCode::kKeyMismatch: return "KeyMismatch";
    case ErrorCode::kTooFewCases: return "TooFewCases";
    case ErrorCode::kUnknownCovariate: return "UnknownCovariate";
    case ErrorCode::kLogTooShort: return "LogTooShort";
    case ErrorCode::kDenseIndexViolation: return "DenseIndexViolation";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kNumericError: return "NumericError";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConflict: return "Conflict";
  }
  return "Unknown";
}

bool is_io_or_schema_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDenseIndexViolation:
    case ErrorCode::kSchemaError:
    case ErrorCode::kNumericError:
    case ErrorCode::kNotFound:
    case ErrorCode::kIoError:
      return true;
    default:
      return false;
  }
}

}  // namespace phaseforge
