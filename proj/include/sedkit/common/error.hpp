// Copyright 2026 The sedkit Authors. All Rights Reserved.
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
#include <utility>

#include <fmt/format.h>

namespace sedkit {

enum class ErrorKind {
  kIngest,       // file could not be opened or read
  kFormat,       // unsupported or malformed encoding
  kShape,
  kParameter,
  kState,
  kVocabulary,   // unknown class name
  kLabel,        // malformed label row
  kCacheFormat,  // bad magic / version / dims in a binary artifact
  kChecksum,
  kMetric,
  kConfig,
  kNumeric,      // non-finite values where finite ones are required
};

inline const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIngest: return "ingest error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kVocabulary: return "vocabulary error";
    case ErrorKind::kLabel: return "label error";
    case ErrorKind::kCacheFormat: return "cache-format error";
    case ErrorKind::kChecksum: return "checksum error";
    case ErrorKind::kMetric: return "metric error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kNumeric: return "numeric error";
  }
  return "error";
}

/// Every failure raised by the library is an Error carrying a kind, so
/// front ends can map kinds onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

template <typename... Args>
[[noreturn]] void Fail(ErrorKind kind, fmt::format_string<Args...> format,
                       Args&&... args) {
  throw Error(kind, fmt::format(format, std::forward<Args>(args)...));
}

}  // namespace sedkit
