// Copyright 2026 opendet contributors
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

#ifndef OPENDET_ERROR_HPP
#define OPENDET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace opendet {

enum class ErrorKind {
  kUnknownTask,
  kMissingEmbedding,
  kDuplicateId,
  kInvalidTag,
  kIoFailure,
  kSchemaMismatch,
  kParseError,
  kUnknownClassName,
  kDimensionMismatch,
  kInvalidClass,
  kTooFewPoints,
  kInsufficientKnownClasses,
  kEmptyBuffer,
  kConfigError,
};

/// Classifies an error kind as a problem with the input files/arguments
/// (exit code 2) as opposed to a failure inside a pipeline stage (exit 3).
constexpr bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnknownTask:
    case ErrorKind::kMissingEmbedding:
    case ErrorKind::kDuplicateId:
    case ErrorKind::kIoFailure:
    case ErrorKind::kSchemaMismatch:
    case ErrorKind::kParseError:
    case ErrorKind::kUnknownClassName:
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kConfigError:
      return true;
    default:
      return false;
  }
}

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace opendet

#endif  // OPENDET_ERROR_HPP
