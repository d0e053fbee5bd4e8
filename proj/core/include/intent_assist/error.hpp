// Copyright 2026 The intent-assist Authors
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

namespace intent_assist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (dimension mismatch, bad index,
// out-of-range parameter).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared during a numeric computation. `index` is the
// batch element (or integration step) where it was first observed.
class NumericFault : public Error {
 public:
  NumericFault(const std::string& what, std::size_t index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Rejection sampling could not place a layout within the attempt budget.
class LayoutError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `line` is 1-based; 0 when not line-addressable.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A checkpoint's stored shapes disagree with what the model spec implies.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace intent_assist
