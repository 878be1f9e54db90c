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

#include <filesystem>
#include <span>

#include <json.hpp>

#include "hdqkd/keyrate.hpp"

namespace hdqkd::keyrate {

nlohmann::json to_json(const KeyRateReport &report);

/// Single-row CSV (`E,rate` for the depolarizing bound, `E_u,E_b,rate`
/// otherwise) plus a JSON sidecar with bound, d, threshold and tolerances.
void write_report(const std::filesystem::path &csv, const KeyRateReport &report);

enum class CurveColumns { TotalError, Split };

/// `E,rate` or `E_u,E_b,rate` rows with a sidecar recording bound, d, profile
/// and tolerances.
void write_curve(const std::filesystem::path &csv, Bound bound, int d, SplitProfile profile,
                 std::span<const CurvePoint> curve, CurveColumns columns);

struct CurveFile {
    nlohmann::json sidecar;
    std::vector<CurvePoint> points;
};

CurveFile read_curve(const std::filesystem::path &csv);

}  // namespace hdqkd::keyrate
