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

#include <cmath>
#include <fstream>

#include "cli_common.hpp"
#include "hdqkd/keyrate.hpp"
#include "hdqkd/keyrate_io.hpp"
#include "hdqkd/mub.hpp"
#include "hdqkd/table_io.hpp"

namespace hdqkd::cli {
namespace fs = std::filesystem;
using namespace hdqkd::keyrate;

json keyrate_defaults() {
    return {{"d", nullptr},     {"bound", nullptr}, {"E", nullptr},       {"E_u", nullptr},
            {"E_b", nullptr},   {"counts", nullptr}, {"curve", nullptr},  {"d_range", "2:32"},
            {"profile", nullptr}, {"block_fraction", nullptr}, {"step", 0.005}};
}

namespace {

void write_json(const fs::path &path, const json &doc) {
    std::ofstream file(path);
    if (!file) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    file << doc.dump(2) << '\n';
}

std::optional<SplitProfile> parse_profile(const json &section) {
    if (has_value(section, "block_fraction")) {
        double f = get_double(section, "block_fraction", "keyrate");
        if (!(f >= 0.0 && f <= 1.0)) config_error("keyrate.block_fraction", "must lie in [0, 1]");
        return SplitProfile{f};
    }
    if (!has_value(section, "profile")) return std::nullopt;
    std::string name = get_string(section, "profile", "keyrate");
    if (name == "uniform") return SplitProfile::uniform();
    if (name == "experiment") return SplitProfile::experiment();
    if (name == "all-block") return SplitProfile::all_block();
    config_error("keyrate.profile", "expected uniform, experiment or all-block, got '" + name + "'");
}

std::pair<int, int> parse_range(const std::string &text) {
    auto colon = text.find(':');
    try {
        if (colon == std::string::npos) throw std::invalid_argument("no colon");
        std::size_t used_a = 0;
        std::size_t used_b = 0;
        std::string a = text.substr(0, colon);
        std::string b = text.substr(colon + 1);
        int lo = std::stoi(a, &used_a);
        int hi = std::stoi(b, &used_b);
        if (used_a != a.size() || used_b != b.size() || lo < 2 || hi < lo) throw std::invalid_argument("range");
        return {lo, hi};
    } catch (const std::logic_error &) {
        config_error("keyrate.d_range", "expected a:b with 2 <= a <= b, got '" + text + "'");
    }
}

struct CountsEstimate {
    int d = 0;
    Bound default_bound = Bound::TwoMubUniform;
    double mean_error = 0.0;
    double uniform_error = 0.0;
    double block_error = 0.0;
    json details;
};

/// normalize_counts, then error statistics per matched setting. The block
/// split is the plain average of decompose_errors over the matched settings,
/// each with the block orientation recorded by `simulate`.
CountsEstimate estimate_from_counts(const fs::path &csv) {
    const protocol::CountTable counts = protocol::read_count_table(csv);
    const json sidecar = protocol::read_sidecar(csv);
    const protocol::ProbabilityTable table = protocol::normalize_counts(counts);
    const SubsetStats stats = subset_stats(table);
    const int d = table.dim();
    const int nbases = table.alice_bases();

    std::vector<protocol::BlockAlignment> alignments(static_cast<std::size_t>(nbases),
                                                     protocol::BlockAlignment::Row);
    if (sidecar.contains("alignments")) {
        const json &names = sidecar.at("alignments");
        for (std::size_t k = 0; k < names.size() && k < alignments.size(); ++k) {
            alignments[k] = protocol::alignment_from_string(names[k].get<std::string>());
        }
    } else if (nbases == 2) {
        alignments[1] = protocol::BlockAlignment::Column;
    }

    CountsEstimate est;
    est.d = d;
    est.mean_error = stats.mean_error;
    json settings = json::array();
    if (mub::exact_sqrt(d) >= 2) {
        for (int k = 0; k < nbases; ++k) {
            protocol::NoiseDecomposition dec = protocol::decompose_errors(table, k, alignments[k]);
            est.uniform_error += dec.uniform / nbases;
            est.block_error += dec.block / nbases;
            settings.push_back({{"basis", k + 1},
                                {"alignment", protocol::to_string(alignments[k])},
                                {"E_t", dec.total},
                                {"E_u", dec.uniform},
                                {"E_b", dec.block},
                                {"block_clamped", dec.block_clamped},
                                {"raw_block", dec.raw_block}});
        }
    }
    if (nbases == d + 1) {
        est.default_bound = Bound::DepolarizingAllMubs;
    } else if (nbases == 2 && mub::exact_sqrt(d) >= 2) {
        est.default_bound = Bound::TwoMubBlock;
    }
    est.details = {{"counts", csv.string()},
                   {"d", d},
                   {"bases", nbases},
                   {"mean_error", stats.mean_error},
                   {"basis_error", stats.basis_error},
                   {"settings", settings}};
    return est;
}

void print_report(const Context &ctx, const KeyRateReport &report) {
    *ctx.out << "bound: " << to_string(report.bound) << ", d = " << report.d << '\n';
    if (report.bound == Bound::TwoMubBlock) {
        *ctx.out << "E_u = " << format_double(report.uniform_error) << ", E_b = "
                 << format_double(report.block_error) << ", E_t = " << format_double(report.total_error) << '\n';
    } else {
        *ctx.out << "E = " << format_double(report.total_error) << '\n';
    }
    *ctx.out << "rate: " << format_double(report.rate) << " bits per sifted photon\n"
             << "threshold: " << format_double(report.threshold.value) << " (margin "
             << format_double(report.margin) << ")\n";
}

void write_rate_curve(const Context &ctx, Bound bound, int d, SplitProfile profile, double step) {
    // The depolarizing entropy argument (d+1)E/d must stay below 1.
    const double upper = bound == Bound::DepolarizingAllMubs ? static_cast<double>(d) / (d + 1) : 1.0;
    std::vector<double> errors;
    for (int i = 0;; ++i) {
        double e = i * step;
        if (e >= upper - 1e-9) break;
        errors.push_back(e);
    }
    const std::vector<CurvePoint> curve = rate_curve(bound, d, errors, profile);
    CurveColumns columns = bound == Bound::TwoMubBlock ? CurveColumns::Split : CurveColumns::TotalError;
    write_curve(ctx.out_dir / "curve.csv", bound, d, profile, curve, columns);
    ctx.note("wrote " + (ctx.out_dir / "curve.csv").string() + " (" + std::to_string(curve.size()) + " points)");
}

void write_threshold_table(const Context &ctx, std::optional<Bound> only, int lo, int hi,
                           std::optional<SplitProfile> profile) {
    std::vector<SplitProfile> block_profiles;
    if (profile) {
        block_profiles.push_back(*profile);
    } else {
        block_profiles = {SplitProfile::experiment(), SplitProfile::all_block()};
    }
    const fs::path csv = ctx.out_dir / "thresholds.csv";
    std::ofstream out(csv);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + csv.string());
    out.precision(17);
    out << "d,bound,block_fraction,threshold,monotone,tangent\n";
    std::size_t rows = 0;
    auto emit = [&](Bound bound, int d, SplitProfile p) {
        out << d << ',' << to_string(bound) << ',' << p.block_fraction << ',';
        try {
            ThresholdResult t = threshold(bound, d, p);
            out << t.value << ',' << (t.monotone ? 1 : 0) << ',' << (t.tangent ? 1 : 0) << '\n';
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::NoThreshold) throw;
            out << "nan,0,0\n";
        }
        ++rows;
    };
    for (int d = lo; d <= hi; ++d) {
        if (!only || *only == Bound::DepolarizingAllMubs) emit(Bound::DepolarizingAllMubs, d, {});
        if (!only || *only == Bound::TwoMubUniform) emit(Bound::TwoMubUniform, d, {});
        if ((!only || *only == Bound::TwoMubBlock) && mub::exact_sqrt(d) >= 2) {
            for (SplitProfile p : block_profiles) emit(Bound::TwoMubBlock, d, p);
        }
    }
    json profiles = json::array();
    for (SplitProfile p : block_profiles) profiles.push_back(p.block_fraction);
    write_json(ctx.out_dir / "thresholds.json",
               {{"d_range", {lo, hi}},
                {"columns", {"d", "bound", "block_fraction", "threshold", "monotone", "tangent"}},
                {"block_fractions", profiles},
                {"note", "two-mub-block rows exist only for perfect-square d; nan marks no root"},
                {"tolerances", {{"root_abs", 1e-9}, {"bracket", {1e-12, 1.0 - 1e-6}}}}});
    ctx.note("wrote " + csv.string() + " (" + std::to_string(rows) + " rows)");
}

}  // namespace

int run_keyrate(const Context &ctx, const json &section) {
    std::optional<Bound> bound;
    if (has_value(section, "bound")) bound = bound_from_string(get_string(section, "bound", "keyrate"));
    std::optional<int> d;
    if (has_value(section, "d")) d = get_int(section, "d", "keyrate");
    std::optional<SplitProfile> profile = parse_profile(section);
    const std::string curve = has_value(section, "curve") ? get_string(section, "curve", "keyrate") : "";
    if (!curve.empty() && curve != "rate" && curve != "thresholds") {
        config_error("keyrate.curve", "expected rate or thresholds, got '" + curve + "'");
    }

    const bool has_counts = has_value(section, "counts");
    const bool has_errors = has_value(section, "E") || has_value(section, "E_u") || has_value(section, "E_b");
    if (has_counts && has_errors) config_error("keyrate", "give either counts or explicit error rates, not both");
    if (!has_counts && !has_errors && curve.empty()) {
        config_error("keyrate", "nothing to compute: give --E, --Eu/--Eb, --counts or --curve");
    }

    if (has_counts || has_errors) {
        KeyRateReport report;
        if (has_counts) {
            CountsEstimate est = estimate_from_counts(get_string(section, "counts", "keyrate"));
            if (d && *d != est.d) {
                throw Error(ErrorKind::InvalidInput, "count table has d = " + std::to_string(est.d) +
                                                         " but d = " + std::to_string(*d) + " was requested");
            }
            d = est.d;
            if (!bound) {
                bound = est.default_bound;
                ctx.note("bound not given; using " + std::string(to_string(*bound)));
            }
            if (*bound == Bound::TwoMubBlock) {
                report = rate_two_mub(est.d, est.uniform_error, est.block_error);
            } else {
                report = *bound == Bound::DepolarizingAllMubs ? rate_depolarizing(est.d, est.mean_error)
                                                              : rate_two_mub(est.d, est.mean_error, 0.0);
            }
            write_json(ctx.out_dir / "decomposition.json", est.details);
        } else {
            if (!d) config_error("keyrate.d", "required value is missing");
            if (!bound) bound = has_value(section, "E") ? Bound::TwoMubUniform : Bound::TwoMubBlock;
            if (*bound == Bound::TwoMubBlock) {
                if (has_value(section, "E")) {
                    if (!profile) config_error("keyrate", "--E with two-mub-block needs --profile or --block-fraction");
                    double e = get_double(section, "E", "keyrate");
                    report = rate_two_mub(*d, e * (1.0 - profile->block_fraction), e * profile->block_fraction);
                } else {
                    double eu = has_value(section, "E_u") ? get_double(section, "E_u", "keyrate") : 0.0;
                    double eb = has_value(section, "E_b") ? get_double(section, "E_b", "keyrate") : 0.0;
                    report = rate_two_mub(*d, eu, eb);
                }
            } else {
                if (!has_value(section, "E")) config_error("keyrate.E", std::string(to_string(*bound)) + " needs --E");
                double e = get_double(section, "E", "keyrate");
                report = *bound == Bound::DepolarizingAllMubs ? rate_depolarizing(*d, e) : rate_two_mub(*d, e, 0.0);
            }
        }
        report.bound = *bound;
        write_report(ctx.out_dir / "keyrate.csv", report);
        print_report(ctx, report);
    }

    if (curve == "rate") {
        if (!d) config_error("keyrate.d", "required for --curve rate");
        if (!bound) config_error("keyrate.bound", "required for --curve rate");
        SplitProfile p = profile.value_or(SplitProfile::experiment());
        if (!profile && *bound == Bound::TwoMubBlock && has_value(section, "E_u") && has_value(section, "E_b")) {
            double eu = get_double(section, "E_u", "keyrate");
            double eb = get_double(section, "E_b", "keyrate");
            if (eu + eb > 0.0) p = SplitProfile{eb / (eu + eb)};
        }
        double step = get_double(section, "step", "keyrate");
        if (!(step > 0.0 && step < 0.5)) config_error("keyrate.step", "must lie in (0, 0.5)");
        write_rate_curve(ctx, *bound, *d, p, step);
    } else if (curve == "thresholds") {
        auto [lo, hi] = parse_range(get_string(section, "d_range", "keyrate"));
        write_threshold_table(ctx, bound, lo, hi, profile);
    }
    return 0;
}

}  // namespace hdqkd::cli
