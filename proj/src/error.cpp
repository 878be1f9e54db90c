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

#include "hdqkd/error.hpp"

namespace hdqkd {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidDimension: return "invalid-dimension";
        case ErrorKind::InvalidBasisIndex: return "invalid-basis-index";
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::GeometryError: return "geometry-error";
        case ErrorKind::SamplingError: return "sampling-error";
        case ErrorKind::InvalidModeSet: return "invalid-mode-set";
        case ErrorKind::InvalidConfig: return "invalid-config";
        case ErrorKind::DegenerateTransfer: return "degenerate-transfer";
        case ErrorKind::InvalidNoise: return "invalid-noise";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::DomainError: return "domain-error";
        case ErrorKind::NoThreshold: return "no-threshold";
        case ErrorKind::IoError: return "io-error";
    }
    return "unknown-error";
}

bool is_usage_error(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateTransfer:
        case ErrorKind::InsufficientData:
        case ErrorKind::NoThreshold:
            return false;
        default:
            return true;
    }
}

Error::Error(ErrorKind kind, const std::string &message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace hdqkd
