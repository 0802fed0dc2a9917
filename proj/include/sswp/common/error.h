// Copyright (c) 2026 The sswp-prosody Authors
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

#ifndef SSWP_COMMON_ERROR_H_
#define SSWP_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace sswp {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes: ConfigError -> 2, DataError/CheckpointError -> 3,
// NumericError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not satisfy an op's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent corpus data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Checkpoint unreadable or incompatible with the model being built.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sswp

#endif  // SSWP_COMMON_ERROR_H_
