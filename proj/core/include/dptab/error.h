//
// Copyright 2026 The dptab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPTAB_ERROR_H_
#define DPTAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace dptab {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorCode {
  kInvalidArgument,  // shape mismatch, bad parameter, precondition violated
  kConfig,           // malformed or inconsistent configuration
  kData,             // unreadable or unusable input data
  kIntegrity,        // corrupt checkpoint or container
  kNonPrivate,       // a privacy operation was requested for a sigma = 0 run
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace dptab

#endif  // DPTAB_ERROR_H_
