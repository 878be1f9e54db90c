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

#include <fstream>
#include <numeric>

#include "cli_common.hpp"
#include "hdqkd/mub.hpp"
#include "hdqkd/protocol.hpp"
#include "hdqkd/random.hpp"
#include "hdqkd/table_io.hpp"

namespace hdqkd::cli {
namespace fs = std::filesystem;
using namespace hdqkd::protocol;

json simulate_defaults() {
    return {{"d", 25},
            {"bases", "sqrt-pair"},
            {"alignments", nullptr},
            {"basis_weights", nullptr},
            {"noise", {{"kind", nullptr}, {"E_t", nullptr}, {"E_u", nullptr}, {"E_b", nullptr}}},
            {"rates",
             {{"pair_rate", 2500.0},
              {"accidental_rate", 0.0},
              {"integration_time", 100.0},
              {"coincidence_window", 400e-12}}},
            {"rounds", 10000}};
}

namespace {

// Sub-seeds keep the Poisson cells and the protocol rounds on unrelated streams.
constexpr std::uint64_t kCountStream = 1;
constexpr std::uint64_t kSessionStream = 2;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) { return CounterRng(seed, stream)(); }

std::vector<mub::Basis> make_bases(const std::string &family, int d) {
    if (family == "sqrt-pair") {
        auto [row, col] = mub::sqrt_mub_pair(d);
        return {row, col};
    }
    if (family == "wh-all") return mub::full_mub_set(d).bases();
    if (family == "dft-pair") return {mub::computational_basis(d), mub::dft_basis(d)};
    config_error("simulate.bases", "unknown family '" + family + "' (expected sqrt-pair, wh-all or dft-pair)");
}

/// Explicit kind wins; otherwise E_t selects uniform noise, E_u or E_b
/// selects block noise, and no value at all means a noiseless channel.
NoiseModel parse_noise(const json &section) {
    const json &n = section.at("noise");
    if (!n.is_object()) config_error("simulate.noise", "expected an object");
    std::string kind;
    if (has_value(n, "kind")) {
        kind = get_string(n, "kind", "simulate.noise");
    } else if (has_value(n, "E_t")) {
        kind = "uniform";
    } else if (has_value(n, "E_u") || has_value(n, "E_b")) {
        kind = "block";
    } else {
        return NoiseModel::uniform(0.0);
    }
    if (kind == "uniform") return NoiseModel::uniform(get_double(n, "E_t", "simulate.noise"));
    if (kind == "block") {
        double eu = has_value(n, "E_u") ? get_double(n, "E_u", "simulate.noise") : 0.0;
        double eb = has_value(n, "E_b") ? get_double(n, "E_b", "simulate.noise") : 0.0;
        return NoiseModel::block_biased(eu, eb);
    }
    config_error("simulate.noise.kind", "expected uniform or block, got '" + kind + "'");
}

double get_rate(const json &rates, const std::string &key) { return get_double(rates, key, "simulate.rates"); }

}  // namespace

int run_simulate(const Context &ctx, const json &section) {
    const int d = get_int(section, "d", "simulate");
    if (d < 2) config_error("simulate.d", "dimension must be at least 2");
    const std::string family = get_string(section, "bases", "simulate");
    const std::vector<mub::Basis> bases = make_bases(family, d);
    const int nbases = static_cast<int>(bases.size());

    std::vector<BlockAlignment> alignments;
    if (has_value(section, "alignments")) {
        for (const auto &a : section.at("alignments")) alignments.push_back(alignment_from_string(a.get<std::string>()));
        if (static_cast<int>(alignments.size()) != nbases) {
            config_error("simulate.alignments", "need one entry per basis (" + std::to_string(nbases) + ")");
        }
    } else {
        alignments.assign(static_cast<std::size_t>(nbases), BlockAlignment::Row);
        if (family == "sqrt-pair") alignments[1] = BlockAlignment::Column;
    }

    std::vector<double> weights(static_cast<std::size_t>(nbases), 1.0 / nbases);
    if (has_value(section, "basis_weights")) {
        weights = section.at("basis_weights").get<std::vector<double>>();
    }

    const NoiseModel noise = parse_noise(section);
    if (!section.contains("rates") || !section.at("rates").is_object()) config_error("simulate.rates", "missing");
    const json &r = section.at("rates");
    SourceRates rates{get_rate(r, "pair_rate"), get_rate(r, "accidental_rate"), get_rate(r, "integration_time"),
                      get_rate(r, "coincidence_window")};
    const long long rounds = get_int(section, "rounds", "simulate");
    if (rounds < 0) config_error("simulate.rounds", "must be non-negative");

    std::vector<mub::Basis> bob;
    for (const auto &b : bases) bob.push_back(b.conjugate());
    const ProbabilityTable ideal = ideal_prob_table(bases, bob);
    const ProbabilityTable table = apply_noise(ideal, noise, alignments);

    if (rates.pair_rate == 0.0 && rates.accidental_rate == 0.0) {
        ctx.warn("pair and accidental rates are zero; every count will be zero");
    }
    const std::uint64_t count_seed = sub_seed(ctx.seed, kCountStream);
    const CountTable counts = sample_counts(table, rates, count_seed);

    json alignment_names = json::array();
    for (auto a : alignments) alignment_names.push_back(to_string(a));
    json extra = {{"bases", family},
                  {"alignments", alignment_names},
                  {"run_seed", ctx.seed},
                  {"noise",
                   {{"kind", noise.kind == NoiseKind::Uniform ? "uniform" : "block"},
                    {"E_t", noise.total_error},
                    {"E_u", noise.uniform_error()},
                    {"E_b", noise.block_error()}}}};
    write_count_table(ctx.out_dir / "counts.csv", counts, extra);
    write_probability_table(ctx.out_dir / "probabilities.csv", table, extra);

    std::uint64_t total = std::accumulate(counts.counts.begin(), counts.counts.end(), std::uint64_t{0});
    json summary = {{"d", d},
                    {"bases", nbases},
                    {"total_counts", total},
                    {"count_seed", count_seed},
                    {"expected_total_error", noise.total_error}};
    ctx.note("d = " + std::to_string(d) + ", " + std::to_string(nbases) + " bases, " + std::to_string(total) +
             " coincidences");

    if (rounds > 0) {
        const std::uint64_t session_seed = sub_seed(ctx.seed, kSessionStream);
        const SessionRecord session = simulate_session(table, weights, rounds, session_seed);
        write_session_jsonl(ctx.out_dir / "session.jsonl", session);
        summary["session_seed"] = session_seed;
        summary["rounds"] = rounds;
        summary["sifted_rounds"] = session.sifted_rounds;
        summary["sifted_errors"] = session.sifted_errors;
        summary["observed_qber"] = session.observed_qber;
        ctx.note(std::to_string(rounds) + " rounds, " + std::to_string(session.sifted_rounds) +
                 " sifted, observed error " + format_double(session.observed_qber));
    }
    std::ofstream file(ctx.out_dir / "simulate_summary.json");
    if (!file) throw Error(ErrorKind::IoError, "cannot write simulate_summary.json");
    file << summary.dump(2) << '\n';
    ctx.note("wrote counts.csv, probabilities.csv" + std::string(rounds > 0 ? ", session.jsonl" : "") + " to " +
             ctx.out_dir.string());
    return 0;
}

}  // namespace hdqkd::cli
