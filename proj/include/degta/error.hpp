// Copyright 2026 The degta Authors
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

#ifndef DEGTA_ERROR_HPP
#define DEGTA_ERROR_HPP

#include <concepts>
#include <stdexcept>
#include <string>

namespace degta {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kUsage = 1,       ///< bad argument or option value
  kValidation = 2,  ///< malformed input data, missing files, shape mismatch
  kNumeric = 3,     ///< non-finite values, solver non-convergence, failed checks
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

/// Builds the message only on failure.
template <std::invocable F>
void require(bool cond, ErrorKind kind, F&& make_message) {
  if (!cond) fail(kind, std::forward<F>(make_message)());
}

}  // namespace degta

#endif  // DEGTA_ERROR_HPP
