// Copyright 2026 The EAsT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace east {

// Base of every error raised by the library. The CLI maps ValidationError
// (and its subclasses) to exit code 1 and NumericError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, inconsistent configs, wrong labels.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operand shapes that cannot be combined.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A distance loss was asked for on fewer than two samples.
class BatchTooSmallError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Internal API misuse (e.g. backward from a non-scalar node).
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by a forward op, a loss or a gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures, always carrying the offending path.
class IoError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace east
