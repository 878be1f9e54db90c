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

#include "hdqkd/table_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "hdqkd/error.hpp"

namespace hdqkd::protocol {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvRow {
    int a, b, k, l;
    std::string value;
};

template <typename T>
T parse_number(const std::string &text, const std::string &where) {
    T value{};
    const char *end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw Error(ErrorKind::InvalidInput, where + ": cannot parse '" + text + "'");
    }
    return value;
}

double parse_double(const std::string &text, const std::string &where) {
    // std::from_chars for double is missing from older libstdc++; strtod
    // round-trips %.17g output exactly.
    char *end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        throw Error(ErrorKind::InvalidInput, where + ": cannot parse '" + text + "'");
    }
    return v;
}

std::vector<CsvRow> read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "a,b,k,l,value") {
        throw Error(ErrorKind::InvalidInput, path.string() + ": expected header 'a,b,k,l,value'");
    }
    std::vector<CsvRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != 5) throw Error(ErrorKind::InvalidInput, where + ": expected 5 columns");
        rows.push_back(CsvRow{parse_number<int>(cells[0], where), parse_number<int>(cells[1], where),
                              parse_number<int>(cells[2], where), parse_number<int>(cells[3], where),
                              cells[4]});
    }
    return rows;
}

void check_row(const CsvRow &r, int d, int K, int L, const std::string &file) {
    if (r.a < 1 || r.a > d || r.b < 1 || r.b > d || r.k < 1 || r.k > K || r.l < 1 || r.l > L) {
        throw Error(ErrorKind::InvalidInput, file + ": index out of range");
    }
}

void write_json(const std::filesystem::path &path, const json &doc) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
}

template <typename Value, typename Get>
void write_csv(const std::filesystem::path &path, int d, int K, int L, Get get) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out << "a,b,k,l,value\n";
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            for (int b = 0; b < d; ++b) {
                for (int a = 0; a < d; ++a) {
                    out << a + 1 << ',' << b + 1 << ',' << k + 1 << ',' << l + 1 << ','
                        << get(a, b, k, l) << '\n';
                }
            }
        }
    }
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path &csv) {
    std::filesystem::path p = csv;
    p.replace_extension(".json");
    return p;
}

json read_sidecar(const std::filesystem::path &csv) {
    const std::filesystem::path path = sidecar_path(csv);
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "missing sidecar " + path.string());
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
    }
}

void write_probability_table(const std::filesystem::path &csv, const ProbabilityTable &table,
                             const json &extra) {
    write_csv<double>(csv, table.dim(), table.alice_bases(), table.bob_bases(),
                      [&](int a, int b, int k, int l) { return format_double(table(a, b, k, l)); });
    json side = extra;
    side["kind"] = "probability";
    side["dim"] = table.dim();
    side["alice_bases"] = table.alice_bases();
    side["bob_bases"] = table.bob_bases();
    write_json(sidecar_path(csv), side);
}

ProbabilityTable read_probability_table(const std::filesystem::path &csv) {
    const json side = read_sidecar(csv);
    try {
        if (side.at("kind").get<std::string>() != "probability") {
            throw Error(ErrorKind::InvalidInput, csv.string() + " is not a probability table");
        }
        const int d = side.at("dim").get<int>();
        const int K = side.at("alice_bases").get<int>();
        const int L = side.at("bob_bases").get<int>();
        ProbabilityTable table(d, K, L);
        const auto rows = read_csv(csv);
        if (rows.size() != table.values().size()) {
            throw Error(ErrorKind::InvalidInput, csv.string() + ": wrong number of rows");
        }
        for (const CsvRow &r : rows) {
            check_row(r, d, K, L, csv.string());
            table.at(r.a - 1, r.b - 1, r.k - 1, r.l - 1) = parse_double(r.value, csv.string());
        }
        table.validate();
        return table;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::InvalidInput, sidecar_path(csv).string() + ": " + e.what());
    }
}

void write_count_table(const std::filesystem::path &csv, const CountTable &counts, const json &extra) {
    write_csv<std::uint64_t>(csv, counts.dim, counts.alice_bases, counts.bob_bases,
                             [&](int a, int b, int k, int l) { return std::to_string(counts(a, b, k, l)); });
    json side = extra;
    side["kind"] = "counts";
    side["dim"] = counts.dim;
    side["alice_bases"] = counts.alice_bases;
    side["bob_bases"] = counts.bob_bases;
    side["integration_time"] = counts.integration_time;
    side["coincidence_window"] = counts.coincidence_window;
    side["seed"] = counts.seed;
    side["generator"] = counts.generator;
    write_json(sidecar_path(csv), side);
}

CountTable read_count_table(const std::filesystem::path &csv) {
    const json side = read_sidecar(csv);
    try {
        if (side.at("kind").get<std::string>() != "counts") {
            throw Error(ErrorKind::InvalidInput, csv.string() + " is not a count table");
        }
        CountTable counts(side.at("dim").get<int>(), side.at("alice_bases").get<int>(),
                          side.at("bob_bases").get<int>());
        counts.integration_time = side.value("integration_time", 0.0);
        counts.coincidence_window = side.value("coincidence_window", 0.0);
        counts.seed = side.value("seed", std::uint64_t{0});
        counts.generator = side.value("generator", std::string{});
        const auto rows = read_csv(csv);
        if (rows.size() != counts.counts.size()) {
            throw Error(ErrorKind::InvalidInput, csv.string() + ": wrong number of rows");
        }
        for (const CsvRow &r : rows) {
            check_row(r, counts.dim, counts.alice_bases, counts.bob_bases, csv.string());
            counts.at(r.a - 1, r.b - 1, r.k - 1, r.l - 1) = parse_number<std::uint64_t>(r.value, csv.string());
        }
        return counts;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::InvalidInput, sidecar_path(csv).string() + ": " + e.what());
    }
}

void write_session_jsonl(std::ostream &out, const SessionRecord &record) {
    for (std::size_t i = 0; i < record.rounds(); ++i) {
        const json line{{"round", i + 1},
                        {"alice_basis", record.alice_basis[i] + 1},
                        {"bob_basis", record.bob_basis[i] + 1},
                        {"alice", record.alice_symbol[i] + 1},
                        {"bob", record.bob_symbol[i] + 1},
                        {"sifted", static_cast<bool>(record.sifted[i])}};
        out << line.dump() << '\n';
    }
}

void write_session_jsonl(const std::filesystem::path &path, const SessionRecord &record) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    write_session_jsonl(out, record);
}

SessionRecord read_session_jsonl(std::istream &in, int dim, std::uint64_t seed) {
    SessionRecord record;
    record.dim = dim;
    record.seed = seed;
    record.generator = generator_id();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const int k = j.at("alice_basis").get<int>() - 1;
            const int l = j.at("bob_basis").get<int>() - 1;
            const int b = j.at("alice").get<int>() - 1;
            const int a = j.at("bob").get<int>() - 1;
            const bool sifted = j.at("sifted").get<bool>();
            record.alice_basis.push_back(k);
            record.bob_basis.push_back(l);
            record.alice_symbol.push_back(b);
            record.bob_symbol.push_back(a);
            record.sifted.push_back(sifted);
            if (sifted) {
                ++record.sifted_rounds;
                if (a != b) ++record.sifted_errors;
            }
        } catch (const json::exception &e) {
            throw Error(ErrorKind::InvalidInput, std::string("bad session line: ") + e.what());
        }
    }
    record.observed_qber = record.sifted_rounds > 0 ? static_cast<double>(record.sifted_errors) /
                                                          static_cast<double>(record.sifted_rounds)
                                                    : 0.0;
    return record;
}

std::string to_string(BlockAlignment alignment) {
    return alignment == BlockAlignment::Row ? "row" : "column";
}

BlockAlignment alignment_from_string(const std::string &text) {
    if (text == "row") return BlockAlignment::Row;
    if (text == "column") return BlockAlignment::Column;
    throw Error(ErrorKind::InvalidConfig, "block alignment must be 'row' or 'column', got '" + text + "'");
}

}  // namespace hdqkd::protocol
