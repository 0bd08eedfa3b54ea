// Copyright 2026 The STERA Authors
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

#include "stera/error.h"

#include <string>

namespace stera {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedCompression: return "UnsupportedCompression";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kMissingIntrinsics: return "MissingIntrinsics";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kInvalidDepth: return "InvalidDepth";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kMissingStream: return "MissingStream";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kNoRevisit: return "NoRevisit";
    case ErrorCode::kNonPositiveHours: return "NonPositiveHours";
    case ErrorCode::kNoData: return "NoData";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInvalidTree: return "InvalidTree";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kServiceUnreachable: return "ServiceUnreachable";
    case ErrorCode::kValidationExhausted: return "ValidationExhausted";
    case ErrorCode::kJointBehindCamera: return "JointBehindCamera";
    case ErrorCode::kInfeasiblePlan: return "InfeasiblePlan";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace stera
