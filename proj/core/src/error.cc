// Copyright 2026 The segsplice Authors.
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

#include "segsplice/error.h"

namespace segsplice {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadFormat: return "BadFormat";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kDuplicateUttId: return "DuplicateUttId";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kOverlapError: return "OverlapError";
    case ErrorCode::kNonContiguousWord: return "NonContiguousWord";
    case ErrorCode::kUnknownUtterance: return "UnknownUtterance";
    case ErrorCode::kSpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kTargetTooSmall: return "TargetTooSmall";
    case ErrorCode::kUnknownGrapheme: return "UnknownGrapheme";
    case ErrorCode::kMissingBpe: return "MissingBpe";
    case ErrorCode::kDanglingRef: return "DanglingRef";
    case ErrorCode::kUncoverableWord: return "UncoverableWord";
    case ErrorCode::kDomainExhausted: return "DomainExhausted";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace segsplice
