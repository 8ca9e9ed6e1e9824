// Copyright 2026 The Kinetrace Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kin {

/// Bad input data: malformed files, invalid masks, invalid configuration.
/// The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedMaskError : public InputError {
 public:
  using InputError::InputError;
};

class DimensionMismatchError : public InputError {
 public:
  using InputError::InputError;
};

/// Parse failure carrying the 1-based line number of the offending line.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A frame was delivered out of index order.
class OrderError : public InputError {
 public:
  using InputError::InputError;
};

/// An internal invariant did not hold. Exit code 2 at the CLI.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace kin
