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
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "hdqkd/protocol.hpp"

namespace hdqkd::protocol {

// CSV with header `a,b,k,l,value` and 1-based indices. Probabilities are
// printed with 17 significant digits so they parse back bit-exactly. Each CSV
// has a JSON sidecar (same stem, ".json") carrying kind, dim, bases, times,
// window, seed and generator id.

std::filesystem::path sidecar_path(const std::filesystem::path &csv);

void write_probability_table(const std::filesystem::path &csv, const ProbabilityTable &table,
                             const nlohmann::json &extra = nlohmann::json::object());
ProbabilityTable read_probability_table(const std::filesystem::path &csv);

void write_count_table(const std::filesystem::path &csv, const CountTable &counts,
                       const nlohmann::json &extra = nlohmann::json::object());
CountTable read_count_table(const std::filesystem::path &csv);

/// Sidecar document of a table file.
nlohmann::json read_sidecar(const std::filesystem::path &csv);

// One JSON object per line:
// {"round":1,"alice_basis":1,"bob_basis":1,"alice":3,"bob":3,"sifted":true}
void write_session_jsonl(std::ostream &out, const SessionRecord &record);
void write_session_jsonl(const std::filesystem::path &path, const SessionRecord &record);
SessionRecord read_session_jsonl(std::istream &in, int dim, std::uint64_t seed);

std::string to_string(BlockAlignment alignment);
BlockAlignment alignment_from_string(const std::string &text);

}  // namespace hdqkd::protocol
