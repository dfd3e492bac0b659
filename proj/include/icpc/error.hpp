// Copyright 2026 The ICPC Authors.
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

namespace icpc {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A compressed size that cannot be derived from the full size.
class InvalidCompression : public Error {
 public:
  using Error::Error;
};

// Inconsistent or incomplete configuration (policy, ladder, run config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor or image dimensions that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf reached the activations or the loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad magic, truncated payload, bad JSON header).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A file written by an incompatible format version.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class FileNotFound : public Error {
 public:
  using Error::Error;
};

// Wall-clock latency repeats disagree by more than the allowed spread.
class UnstableMeasurement : public Error {
 public:
  using Error::Error;
};

}  // namespace icpc
