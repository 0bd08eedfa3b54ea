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

#ifndef STERA_ERROR_H_
#define STERA_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace stera {

// Every failure raised by the library carries one of these codes so callers
// (and the pipeline summary) can branch on the kind without parsing text.
enum class ErrorCode {
  // log_format
  kBadMagic,
  kUnsupportedCompression,
  kSchemaMismatch,
  kMissingIntrinsics,
  kMalformedRecord,
  kIoFailure,
  // geometry
  kInvalidDepth,
  kOutOfBounds,
  kMissingStream,
  // traj_metrics
  kDegenerateInput,
  kInsufficientOverlap,
  kNoRevisit,
  kNonPositiveHours,
  // hand_kinematics / labels
  kNoData,
  kEmptyCorpus,
  // hierarchy
  kInvalidTree,
  kEmptyInput,
  kServiceUnreachable,
  kValidationExhausted,
  // synth
  kJointBehindCamera,
  kInfeasiblePlan,
  // configuration and argument errors
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stera

#endif  // STERA_ERROR_H_
