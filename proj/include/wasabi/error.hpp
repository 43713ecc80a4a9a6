// Copyright 2026 The wasabi-planar Authors
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

#ifndef WASABI_ERROR_HPP_
#define WASABI_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace wasabi {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kNonFinite,
  kStaleCache,
  kMalformedHeader,
  kNonNumericCell,
  kTrajectoryTooShort,
  kNonUnitGravity,
  kNoTrajectories,
  kNonUniformTimestep,
  kSequenceTooShort,
  kSequenceTooLong,
  kIo,
  kConfig,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kStaleCache: return "stale cache";
    case ErrorCode::kMalformedHeader: return "malformed header";
    case ErrorCode::kNonNumericCell: return "non-numeric cell";
    case ErrorCode::kTrajectoryTooShort: return "trajectory shorter than horizon";
    case ErrorCode::kNonUnitGravity: return "non-unit gravity vector";
    case ErrorCode::kNoTrajectories: return "no trajectories";
    case ErrorCode::kNonUniformTimestep: return "non-uniform time step";
    case ErrorCode::kSequenceTooShort: return "sequence too short";
    case ErrorCode::kSequenceTooLong: return "sequence too long";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kConfig: return "config error";
  }
  return "unknown";
}

// All library failures surface as this exception; code() identifies the
// diagnostic class so callers and tests can tell them apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wasabi

#endif  // WASABI_ERROR_HPP_
