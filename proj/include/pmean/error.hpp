// Copyright 2026 The pmean Authors
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

#ifndef PMEAN_ERROR_HPP
#define PMEAN_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmean {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or config text. line() is 1-based, 0 when unknown.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

  // Same error and line with `context` (usually a file path) in front.
  FormatError with_context(const std::string& context) const {
    return FormatError(context + ": " + what(), line_, Prefixed{});
  }

 private:
  struct Prefixed {};
  FormatError(const std::string& message, std::size_t line, Prefixed)
      : Error(message), line_(line) {}

  std::size_t line_;
};

// Vector or matrix shape disagreement.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A power mean hit an undefined real power while running in strict mode.
class NumericalPolicyError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that cannot be processed (too few pairs, one class, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmean

#endif  // PMEAN_ERROR_HPP
