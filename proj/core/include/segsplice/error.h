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

#ifndef SEGSPLICE_ERROR_H_
#define SEGSPLICE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace segsplice {

enum class ErrorCode {
  kMissingFile,
  kIoFailure,
  kBadMagic,
  kBadFormat,
  kDimMismatch,
  kDuplicateUttId,
  kMalformedLine,
  kOverlapError,
  kNonContiguousWord,
  kUnknownUtterance,
  kSpanOutOfRange,
  kEmptyCorpus,
  kTargetTooSmall,
  kUnknownGrapheme,
  kMissingBpe,
  kDanglingRef,
  kUncoverableWord,
  kDomainExhausted,
  kInvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

// All recoverable failures in the library are reported as Error. The code is
// stable and machine-checkable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace segsplice

#endif  // SEGSPLICE_ERROR_H_
