// Copyright 2026 The weakpovm Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace weakpovm {

/// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    validation,  ///< malformed or physically invalid input (POVM, state, config)
    parse,       ///< unreadable file or schema mismatch
    singular,    ///< operator not invertible where an inverse is required
    numerics,    ///< a numerical invariant failed beyond tolerance
    geometry,    ///< the walk geometry became degenerate (|r| -> 1, c_k <= 0, ...)
    constraint,  ///< a target operator cannot be realized by the destructive model
    guard,       ///< a resource guard was exceeded (enumeration size, recursion depth)
    zero_branch, ///< a measurement outcome of zero probability was forced
    internal,    ///< a condition that should be unreachable
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace weakpovm
