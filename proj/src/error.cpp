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

#include "opendet/error.hpp"

namespace opendet {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnknownTask: return "UnknownTask";
    case ErrorKind::kMissingEmbedding: return "MissingEmbedding";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kInvalidTag: return "InvalidTag";
    case ErrorKind::kIoFailure: return "IoFailure";
    case ErrorKind::kSchemaMismatch: return "SchemaMismatch";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kUnknownClassName: return "UnknownClassName";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kInvalidClass: return "InvalidClass";
    case ErrorKind::kTooFewPoints: return "TooFewPoints";
    case ErrorKind::kInsufficientKnownClasses: return "InsufficientKnownClasses";
    case ErrorKind::kEmptyBuffer: return "EmptyBuffer";
    case ErrorKind::kConfigError: return "ConfigError";
  }
  return "Error";
}

}  // namespace opendet
