// Copyright 2026 The PointMask Authors.
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

#ifndef POINTMASK_CORE_ERRORS_HPP_
#define POINTMASK_CORE_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pointmask {

/// Base of every error raised by the library. The C API maps each subclass
/// onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a precondition that is not about shapes or values.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

  std::size_t line() const noexcept { return line_; }
  /// Message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// Malformed binary container (dataset or checkpoint).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during optimization (non-finite gradients and such).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Operation not supported by the model's masking variant.
class VariantError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pointmask

#endif  // POINTMASK_CORE_ERRORS_HPP_
