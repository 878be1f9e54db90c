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

#include "hdqkd/mub_json.hpp"

#include <fstream>

#include "hdqkd/error.hpp"

namespace hdqkd::mub {

using nlohmann::json;

json to_json(const Basis &basis) {
    const int d = basis.dim();
    json re = json::array();
    json im = json::array();
    for (int n = 0; n < d; ++n) {
        json re_row = json::array();
        json im_row = json::array();
        for (int k = 0; k < d; ++k) {
            re_row.push_back(basis(n, k).real());
            im_row.push_back(basis(n, k).imag());
        }
        re.push_back(std::move(re_row));
        im.push_back(std::move(im_row));
    }
    return json{{"dim", d}, {"label", basis.label()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

json to_json(const MubSet &set) {
    json bases = json::array();
    for (const Basis &b : set.bases()) bases.push_back(to_json(b));
    return json{{"dim", set.dim()}, {"bases", std::move(bases)}};
}

Basis basis_from_json(const json &doc, Validation validation) {
    try {
        const int d = doc.at("dim").get<int>();
        if (d < 1) throw Error(ErrorKind::InvalidDimension, "dim must be >= 1");
        const json &re = doc.at("re");
        const json &im = doc.at("im");
        if (re.size() != static_cast<std::size_t>(d) || im.size() != static_cast<std::size_t>(d)) {
            throw Error(ErrorKind::InvalidInput, "amplitude tables must have dim rows");
        }
        ComplexMatrix amps(d, d);
        for (int n = 0; n < d; ++n) {
            const json &re_row = re.at(static_cast<std::size_t>(n));
            const json &im_row = im.at(static_cast<std::size_t>(n));
            if (re_row.size() != static_cast<std::size_t>(d) ||
                im_row.size() != static_cast<std::size_t>(d)) {
                throw Error(ErrorKind::InvalidInput, "amplitude rows must have dim entries");
            }
            for (int k = 0; k < d; ++k) {
                amps(n, k) = Complex(re_row.at(static_cast<std::size_t>(k)).get<double>(),
                                     im_row.at(static_cast<std::size_t>(k)).get<double>());
            }
        }
        std::string label = doc.value("label", std::string{});
        if (validation == Validation::Lenient) return Basis::unchecked(std::move(amps), std::move(label));
        return Basis(std::move(amps), std::move(label));
    } catch (const json::exception &e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed basis document: ") + e.what());
    }
}

MubSet mub_set_from_json(const json &doc) {
    try {
        std::vector<Basis> bases;
        for (const json &b : doc.at("bases")) bases.push_back(basis_from_json(b));
        MubSet set(std::move(bases));
        if (doc.contains("dim") && doc.at("dim").get<int>() != set.dim()) {
            throw Error(ErrorKind::InvalidInput, "MUB set dim does not match its bases");
        }
        return set;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::InvalidInput, std::string("malformed MUB set document: ") + e.what());
    }
}

void write_basis_file(const std::filesystem::path &path, const Basis &basis) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    out << to_json(basis).dump(1) << '\n';
}

Basis read_basis_file(const std::filesystem::path &path, Validation validation) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
    }
    return basis_from_json(doc, validation);
}

}  // namespace hdqkd::mub
