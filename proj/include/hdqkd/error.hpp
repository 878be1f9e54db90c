// Copyright 2026 The hdqkd Authors
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

namespace hdqkd {

enum class ErrorKind {
    InvalidDimension,
    InvalidBasisIndex,
    InvalidInput,
    GeometryError,
    SamplingError,
    InvalidModeSet,
    InvalidConfig,
    DegenerateTransfer,
    InvalidNoise,
    InsufficientData,
    DomainError,
    NoThreshold,
    IoError,
};

/// Kebab-case identifier, e.g. "invalid-dimension".
std::string_view to_string(ErrorKind kind);

/// True for errors caused by bad user input (CLI exit code 2), false for
/// failures that happen after validation (exit code 1).
bool is_usage_error(ErrorKind kind);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message);

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace hdqkd
