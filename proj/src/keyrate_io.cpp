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

#include "hdqkd/keyrate_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "hdqkd/error.hpp"

namespace hdqkd::keyrate {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::filesystem::path sidecar(const std::filesystem::path &csv) {
    std::filesystem::path p = csv;
    p.replace_extension(".json");
    return p;
}

json tolerances() {
    return json{{"root_abs_rate", 1e-9}, {"bracket", {1e-12, 1.0 - 1e-6}}, {"max_bisection", 200}};
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out << text;
}

}  // namespace

json to_json(const KeyRateReport &report) {
    return json{{"bound", std::string(to_string(report.bound))},
                {"d", report.d},
                {"E", report.total_error},
                {"E_u", report.uniform_error},
                {"E_b", report.block_error},
                {"rate", report.rate},
                {"threshold", report.threshold.value},
                {"threshold_monotone", report.threshold.monotone},
                {"threshold_tangent", report.threshold.tangent},
                {"margin", report.margin}};
}

void write_report(const std::filesystem::path &csv, const KeyRateReport &report) {
    std::ostringstream out;
    if (report.bound == Bound::DepolarizingAllMubs) {
        out << "E,rate\n" << fmt(report.total_error) << ',' << fmt(report.rate) << '\n';
    } else {
        out << "E_u,E_b,rate\n"
            << fmt(report.uniform_error) << ',' << fmt(report.block_error) << ',' << fmt(report.rate) << '\n';
    }
    write_text(csv, out.str());
    json side = to_json(report);
    side["tolerances"] = tolerances();
    write_text(sidecar(csv), side.dump(2) + "\n");
}

void write_curve(const std::filesystem::path &csv, Bound bound, int d, SplitProfile profile,
                 std::span<const CurvePoint> curve, CurveColumns columns) {
    std::ostringstream out;
    out << (columns == CurveColumns::TotalError ? "E,rate\n" : "E_u,E_b,rate\n");
    for (const CurvePoint &p : curve) {
        if (columns == CurveColumns::TotalError) {
            out << fmt(p.total_error) << ',' << fmt(p.rate) << '\n';
        } else {
            out << fmt(p.uniform_error) << ',' << fmt(p.block_error) << ',' << fmt(p.rate) << '\n';
        }
    }
    write_text(csv, out.str());
    const json side{{"bound", std::string(to_string(bound))},
                    {"d", d},
                    {"profile", {{"block_fraction", profile.block_fraction}}},
                    {"columns", columns == CurveColumns::TotalError ? "E,rate" : "E_u,E_b,rate"},
                    {"tolerances", tolerances()}};
    write_text(sidecar(csv), side.dump(2) + "\n");
}

CurveFile read_curve(const std::filesystem::path &csv) {
    CurveFile file;
    {
        std::ifstream in(sidecar(csv));
        if (!in) throw Error(ErrorKind::IoError, "missing sidecar for " + csv.string());
        try {
            in >> file.sidecar;
        } catch (const json::exception &e) {
            throw Error(ErrorKind::InvalidInput, e.what());
        }
    }
    std::ifstream in(csv);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + csv.string());
    std::string line;
    std::getline(in, line);
    const bool split = line == "E_u,E_b,rate";
    if (!split && line != "E,rate") throw Error(ErrorKind::InvalidInput, csv.string() + ": unknown header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(std::strtod(cell.c_str(), nullptr));
        if (cells.size() != (split ? 3u : 2u)) throw Error(ErrorKind::InvalidInput, csv.string() + ": bad row");
        CurvePoint p;
        if (split) {
            p.uniform_error = cells[0];
            p.block_error = cells[1];
            p.total_error = cells[0] + cells[1];
            p.rate = cells[2];
        } else {
            p.total_error = cells[0];
            p.rate = cells[1];
        }
        file.points.push_back(p);
    }
    return file;
}

}  // namespace hdqkd::keyrate
