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

#include <algorithm>
#include <fstream>

#include "cli_common.hpp"
#include "hdqkd/mub.hpp"
#include "hdqkd/mub_json.hpp"

namespace hdqkd::cli {
namespace fs = std::filesystem;

json mub_defaults() {
    return {{"d", nullptr}, {"family", "dft"}, {"r", nullptr}, {"files", json::array()}};
}

namespace {

struct NamedBasis {
    std::string file_stem;
    mub::Basis basis;
};

std::vector<NamedBasis> build_family(const json &section) {
    int d = get_int(section, "d", "mub");
    if (d < 2) config_error("mub.d", "dimension must be at least 2");
    std::string family = get_string(section, "family", "mub");
    std::string stem = "mub_d" + std::to_string(d) + "_" + family;

    std::vector<NamedBasis> out;
    if (family == "computational") {
        out.push_back({stem, mub::computational_basis(d)});
    } else if (family == "dft") {
        out.push_back({stem, mub::dft_basis(d)});
    } else if (family == "wh") {
        int r = get_int(section, "r", "mub");
        out.push_back({stem + "_r" + std::to_string(r), mub::wh_basis(d, r)});
    } else if (family == "wh-all") {
        mub::MubSet set = mub::full_mub_set(d);
        for (int i = 0; i < set.size(); ++i) out.push_back({stem + "_" + std::to_string(i + 1), set[i]});
    } else if (family == "sqrt-pair") {
        auto [row, col] = mub::sqrt_mub_pair(d);
        out.push_back({stem + "_1", row});
        out.push_back({stem + "_2", col});
    } else {
        config_error("mub.family", "unknown family '" + family +
                                       "' (expected computational, dft, wh, wh-all or sqrt-pair)");
    }
    return out;
}

}  // namespace

int run_mub_gen(const Context &ctx, const json &section) {
    std::vector<NamedBasis> bases = build_family(section);
    for (const auto &nb : bases) {
        fs::path path = ctx.out_dir / (nb.file_stem + ".json");
        mub::write_basis_file(path, nb.basis);
        ctx.note("wrote " + path.string());
    }
    ctx.note(std::to_string(bases.size()) + " basis file(s), d = " + std::to_string(bases.front().basis.dim()));
    return 0;
}

int run_mub_check(const Context &ctx, const json &section) {
    std::vector<NamedBasis> bases;
    const json &files = section.at("files");
    if (!files.is_array()) config_error("mub.files", "expected an array of paths");
    if (files.empty()) {
        bases = build_family(section);
    } else {
        for (const auto &f : files) {
            fs::path path = f.get<std::string>();
            bases.push_back({path.string(), mub::read_basis_file(path, mub::Validation::Lenient)});
        }
    }
    int d = bases.front().basis.dim();
    for (const auto &nb : bases) {
        if (nb.basis.dim() != d) {
            throw Error(ErrorKind::InvalidInput, nb.file_stem + " has dimension " +
                                                     std::to_string(nb.basis.dim()) + ", expected " +
                                                     std::to_string(d));
        }
    }

    json report = {{"d", d},
                   {"unitarity_tolerance", mub::kUnitarityTolerance},
                   {"unbiased_tolerance", mub::kUnbiasedTolerance}};
    double max_unitarity = 0.0;
    json per_basis = json::array();
    for (const auto &nb : bases) {
        double dev = mub::unitarity_deviation(nb.basis.amplitudes());
        max_unitarity = std::max(max_unitarity, dev);
        per_basis.push_back({{"basis", nb.file_stem}, {"unitarity_deviation", dev}});
    }

    double max_unbiased = 0.0;
    json pairs = json::array();
    for (std::size_t i = 0; i < bases.size(); ++i) {
        for (std::size_t j = i + 1; j < bases.size(); ++j) {
            double dev = mub::check_mub_pair(bases[i].basis, bases[j].basis).max_deviation;
            max_unbiased = std::max(max_unbiased, dev);
            pairs.push_back({{"first", i + 1}, {"second", j + 1}, {"max_deviation", dev}});
        }
    }
    bool unitary_ok = max_unitarity <= mub::kUnitarityTolerance;
    bool unbiased_ok = max_unbiased <= mub::kUnbiasedTolerance;
    report["bases"] = per_basis;
    report["pairs"] = pairs;
    report["max_unitarity_deviation"] = max_unitarity;
    report["max_unbiased_deviation"] = pairs.empty() ? json(nullptr) : json(max_unbiased);
    report["pass"] = unitary_ok && unbiased_ok;

    std::ofstream file(ctx.out_dir / "mub_check.json");
    if (!file) throw Error(ErrorKind::IoError, "cannot write mub_check.json");
    file << report.dump(2) << '\n';

    // The deviation report is the point of the command, so it ignores --quiet.
    *ctx.out << "bases: " << bases.size() << ", d = " << d << '\n'
             << "max unitarity deviation: " << format_double(max_unitarity, 3) << " (tolerance "
             << format_double(mub::kUnitarityTolerance, 3) << ")" << (unitary_ok ? "" : "  EXCEEDED") << '\n';
    if (!pairs.empty()) {
        *ctx.out << "max unbiasedness deviation: " << format_double(max_unbiased, 3) << " (tolerance "
                 << format_double(mub::kUnbiasedTolerance, 3) << ")" << (unbiased_ok ? "" : "  EXCEEDED")
                 << '\n';
    }
    return unitary_ok && unbiased_ok ? 0 : 1;
}

}  // namespace hdqkd::cli
