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

#include <json.hpp>

#include "hdqkd/mub.hpp"

namespace hdqkd::mub {

// {"dim": d, "label": str, "re": [[...]], "im": [[...]]}, row-major, row n
// holds the amplitudes of computational mode n across all states.
nlohmann::json to_json(const Basis &basis);
// {"dim": d, "bases": [<basis>, ...]}
nlohmann::json to_json(const MubSet &set);

enum class Validation { Strict, Lenient };

/// Lenient skips the unitarity check (the document must still be well formed).
Basis basis_from_json(const nlohmann::json &doc, Validation validation = Validation::Strict);
MubSet mub_set_from_json(const nlohmann::json &doc);

void write_basis_file(const std::filesystem::path &path, const Basis &basis);
Basis read_basis_file(const std::filesystem::path &path, Validation validation = Validation::Strict);

}  // namespace hdqkd::mub
