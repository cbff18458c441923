// Copyright 2026 The pafs Authors.
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

namespace pafs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input stream/file does not have the expected layout (bad magic, version,
/// malformed manifest row, unsupported encoding).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// File has the right layout but its contents are inconsistent
/// (truncated payload, tampered header counts).
class CorruptionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Dataset manifest violates its own rules (e.g. one class listed
/// under two splits).
class ManifestError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A caller violated an operation precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An operation received an empty input where at least one element is needed.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Episode sampling is impossible for the requested shape
/// (not enough classes or samples).
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Training aborted (e.g. the loss went non-finite); the message carries a
/// dump of the offending episode.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace pafs
