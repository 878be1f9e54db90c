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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

#include "cli.hpp"
#include "hdqkd/keyrate_io.hpp"
#include "hdqkd/mask_io.hpp"
#include "hdqkd/mub.hpp"
#include "hdqkd/mub_json.hpp"
#include "hdqkd/table_io.hpp"
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string> &args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = hdqkd::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string &name) {
    fs::path dir = fs::temp_directory_path() / ("hdqkd_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const fs::path &path) { return json::parse(slurp(path)); }

/// First number printed after `label` on stdout.
double printed_value(const std::string &text, const std::string &label) {
    auto pos = text.find(label);
    EXPECT_NE(pos, std::string::npos) << text;
    if (pos == std::string::npos) return 0.0;
    return std::stod(text.substr(pos + label.size()));
}

TEST(CliMub, GenWhAllWritesSixFiles) {
    fs::path dir = scratch("wh_all");
    Result r = run({"mub", "gen", "--d", "5", "--family", "wh-all", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    hdqkd::mub::MubSet set = hdqkd::mub::full_mub_set(5);
    for (int i = 0; i < 6; ++i) {
        fs::path file = dir / ("mub_d5_wh-all_" + std::to_string(i + 1) + ".json");
        ASSERT_TRUE(fs::exists(file));
        EXPECT_EQ(hdqkd::mub::read_basis_file(file).amplitudes(), set[i].amplitudes());
    }
    EXPECT_FALSE(fs::exists(dir / "mub_d5_wh-all_7.json"));
    EXPECT_TRUE(fs::exists(dir / "resolved_config.mub.json"));
}

TEST(CliMub, GenSqrtPairWritesTwoFiles) {
    fs::path dir = scratch("sqrt_pair");
    Result r = run({"mub", "gen", "--d", "25", "--family", "sqrt-pair", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto [row, col] = hdqkd::mub::sqrt_mub_pair(25);
    EXPECT_EQ(hdqkd::mub::read_basis_file(dir / "mub_d25_sqrt-pair_1.json").amplitudes(), row.amplitudes());
    EXPECT_EQ(hdqkd::mub::read_basis_file(dir / "mub_d25_sqrt-pair_2.json").amplitudes(), col.amplitudes());
}

TEST(CliMub, CheckPassesOnGeneratedFiles) {
    fs::path dir = scratch("check_ok");
    ASSERT_EQ(run({"mub", "gen", "--d", "5", "--family", "wh-all", "--out", dir.string()}).code, 0);
    std::vector<std::string> args = {"mub", "check", "--out", dir.string()};
    for (int i = 1; i <= 6; ++i) args.push_back((dir / ("mub_d5_wh-all_" + std::to_string(i) + ".json")).string());
    Result r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_LT(printed_value(r.out, "max unitarity deviation: "), 1e-12);
    EXPECT_LT(printed_value(r.out, "max unbiasedness deviation: "), 1e-10);
    json report = read_json(dir / "mub_check.json");
    EXPECT_TRUE(report.at("pass").get<bool>());
    EXPECT_EQ(report.at("pairs").size(), 15u);
}

TEST(CliMub, CheckReportsCorruptedFile) {
    fs::path dir = scratch("check_bad");
    ASSERT_EQ(run({"mub", "gen", "--d", "5", "--family", "dft", "--out", dir.string()}).code, 0);
    fs::path file = dir / "mub_d5_dft.json";
    json doc = read_json(file);
    doc["re"][0][0] = 0.9;
    std::ofstream(file) << doc.dump();
    Result r = run({"mub", "check", file.string(), "--out", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("EXCEEDED"), std::string::npos);
    EXPECT_GT(printed_value(r.out, "max unitarity deviation: "), 1e-3);
    EXPECT_FALSE(read_json(dir / "mub_check.json").at("pass").get<bool>());
}

TEST(CliMub, MalformedFileIsUsageError) {
    fs::path dir = scratch("check_malformed");
    std::ofstream(dir / "broken.json") << "{\"dim\": 3, \"re\": [";
    Result r = run({"mub", "check", (dir / "broken.json").string(), "--out", dir.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST(CliMub, InvalidDimensionOrFamilyExitsTwo) {
    fs::path dir = scratch("mub_errors");
    EXPECT_EQ(run({"mub", "gen", "--d", "6", "--family", "wh-all", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"mub", "gen", "--d", "5", "--family", "sqrt-pair", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"mub", "gen", "--d", "5", "--family", "nope", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"mub", "gen", "--family", "dft", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"mub", "gen", "--d", "five", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"mub", "gen", "--unknown-flag"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
}

TEST(CliGlobal, HelpExitsZero) {
    Result r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("keyrate"), std::string::npos);
}

TEST(CliGlobal, FlagsOverrideConfigFile) {
    fs::path dir = scratch("config_merge");
    std::ofstream(dir / "config.json") << json{{"schema_version", 1},
                                               {"mub", {{"d", 7}, {"family", "dft"}}}}.dump();
    Result r = run({"--config", (dir / "config.json").string(), "--out", dir.string(), "mub", "gen", "--d", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "mub_d3_dft.json"));
    EXPECT_FALSE(fs::exists(dir / "mub_d7_dft.json"));
    json resolved = read_json(dir / "resolved_config.mub.json");
    EXPECT_EQ(resolved.at("mub").at("d"), 3);
    EXPECT_EQ(resolved.at("schema_version"), 1);
}

TEST(CliGlobal, ConfigWithoutSchemaVersionRejected) {
    fs::path dir = scratch("config_version");
    std::ofstream(dir / "config.json") << json{{"mub", {{"d", 5}}}}.dump();
    EXPECT_EQ(run({"--config", (dir / "config.json").string(), "mub", "gen"}).code, 2);
    std::ofstream(dir / "bad.json") << "{ not json";
    EXPECT_EQ(run({"--config", (dir / "bad.json").string(), "mub", "gen"}).code, 2);
    EXPECT_EQ(run({"--config", (dir / "missing.json").string(), "mub", "gen"}).code, 2);
}

TEST(CliGlobal, OutputDirectoryFromEnvironment) {
    fs::path dir = scratch("env_out");
    ::setenv("HDQKD_OUT_DIR", dir.string().c_str(), 1);
    Result r = run({"mub", "gen", "--d", "3", "--quiet"});
    ::unsetenv("HDQKD_OUT_DIR");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_TRUE(fs::exists(dir / "mub_d3_dft.json"));
}

TEST(CliKeyrate, DepolarizingFiveDimensional) {
    fs::path dir = scratch("keyrate_dep");
    Result r = run({"keyrate", "--d", "5", "--bound", "depolarizing", "--E", "0.11", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(printed_value(r.out, "rate: "), 1.1537, 1e-3);
    json side = read_json(dir / "keyrate.json");
    EXPECT_NEAR(side.at("rate").get<double>(), 1.1537, 1e-3);
}

TEST(CliKeyrate, BlockBiasedTwentyFiveDimensional) {
    fs::path dir = scratch("keyrate_block");
    Result r = run({"keyrate", "--d", "25", "--bound", "two-mub-block", "--Eu", "0.073", "--Eb", "0.248", "--out",
                    dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(printed_value(r.out, "rate: "), 0.816, 2e-3);
    EXPECT_NE(r.out.find("threshold: "), std::string::npos);
}

TEST(CliKeyrate, ThresholdCurve) {
    fs::path dir = scratch("keyrate_thresholds");
    Result r = run({"keyrate", "--curve", "thresholds", "--d-range", "2:32", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(dir / "thresholds.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "d,bound,block_fraction,threshold,monotone,tangent");
    int rows = 0;
    double d2_uniform = 0.0;
    while (std::getline(in, line)) {
        ++rows;
        std::vector<std::string> fields;
        std::stringstream row(line);
        for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
        ASSERT_EQ(fields.size(), 6u) << line;
        if (fields[0] == "2" && fields[1] == "two_mub_uniform") d2_uniform = std::stod(fields[3]);
    }
    // 31 dimensions x 2 bounds plus 2 block rows for each of 4, 9, 16, 25.
    EXPECT_EQ(rows, 31 * 2 + 4 * 2);
    EXPECT_NEAR(d2_uniform, 0.1100, 5e-4);
    EXPECT_EQ(run({"keyrate", "--curve", "thresholds", "--d-range", "9:3", "--out", dir.string()}).code, 2);
}

TEST(CliKeyrate, RateCurveRoundTrips) {
    fs::path dir = scratch("keyrate_curve");
    Result r = run({"keyrate", "--curve", "rate", "--d", "25", "--bound", "two-mub-block", "--profile", "experiment",
                    "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    hdqkd::keyrate::CurveFile curve = hdqkd::keyrate::read_curve(dir / "curve.csv");
    ASSERT_EQ(curve.points.size(), 200u);
    EXPECT_NEAR(curve.points.front().rate, std::log2(25.0), 1e-12);
    EXPECT_NEAR(curve.sidecar.at("profile").at("block_fraction").get<double>(), 0.77, 1e-15);
}

TEST(CliKeyrate, MissingInputsAreUsageErrors) {
    fs::path dir = scratch("keyrate_errors");
    EXPECT_EQ(run({"keyrate", "--d", "25", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"keyrate", "--d", "5", "--bound", "depolarizing", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"keyrate", "--d", "5", "--bound", "nonsense", "--E", "0.1", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"keyrate", "--d", "5", "--bound", "two-mub-block", "--Eu", "0.1", "--Eb", "0.1", "--out",
                   dir.string()})
                  .code,
              2);
}

TEST(CliSimulate, DeterministicForFixedSeed) {
    fs::path a = scratch("sim_a");
    fs::path b = scratch("sim_b");
    fs::path c = scratch("sim_c");
    std::vector<std::string> base = {"simulate", "--d", "25", "--Eu", "0.073", "--Eb", "0.248", "--rounds", "2000",
                                     "--quiet", "--seed"};
    auto with = [&](const std::string &seed, const fs::path &dir) {
        auto args = base;
        args.push_back(seed);
        args.push_back("--out");
        args.push_back(dir.string());
        return run(args);
    };
    ASSERT_EQ(with("11", a).code, 0);
    ASSERT_EQ(with("11", b).code, 0);
    ASSERT_EQ(with("12", c).code, 0);
    for (const char *name : {"counts.csv", "counts.json", "probabilities.csv", "session.jsonl"}) {
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    }
    EXPECT_NE(slurp(a / "counts.csv"), slurp(c / "counts.csv"));
    EXPECT_EQ(slurp(a / "probabilities.csv"), slurp(c / "probabilities.csv"));
}

TEST(CliSimulate, ResolvedConfigReproducesRun) {
    fs::path a = scratch("sim_replay_a");
    fs::path b = scratch("sim_replay_b");
    ASSERT_EQ(run({"simulate", "--d", "9", "--Et", "0.2", "--rounds", "500", "--seed", "99", "--out", a.string(),
                   "--quiet"})
                  .code,
              0);
    Result r = run({"--config", (a / "resolved_config.simulate.json").string(), "--out", b.string(), "simulate"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(a / "counts.csv"), slurp(b / "counts.csv"));
    EXPECT_EQ(slurp(a / "session.jsonl"), slurp(b / "session.jsonl"));
}

TEST(CliSimulate, OutputsRoundTripThroughParsers) {
    fs::path dir = scratch("sim_roundtrip");
    ASSERT_EQ(run({"simulate", "--d", "4", "--Eu", "0.05", "--Eb", "0.1", "--rounds", "300", "--out", dir.string(),
                   "--quiet"})
                  .code,
              0);
    hdqkd::protocol::CountTable counts = hdqkd::protocol::read_count_table(dir / "counts.csv");
    fs::path copy = dir / "copy.csv";
    hdqkd::protocol::write_count_table(copy, counts, hdqkd::protocol::read_sidecar(dir / "counts.csv"));
    EXPECT_EQ(slurp(copy), slurp(dir / "counts.csv"));
    hdqkd::protocol::ProbabilityTable table = hdqkd::protocol::read_probability_table(dir / "probabilities.csv");
    fs::path pcopy = dir / "pcopy.csv";
    hdqkd::protocol::write_probability_table(pcopy, table, hdqkd::protocol::read_sidecar(dir / "probabilities.csv"));
    EXPECT_EQ(slurp(pcopy), slurp(dir / "probabilities.csv"));
}

TEST(CliSimulate, NoiselessSixBasesAreDiagonal) {
    fs::path dir = scratch("sim_noiseless");
    ASSERT_EQ(run({"simulate", "--d", "5", "--bases", "wh-all", "--rounds", "0", "--out", dir.string(), "--quiet"})
                  .code,
              0);
    hdqkd::protocol::CountTable counts = hdqkd::protocol::read_count_table(dir / "counts.csv");
    ASSERT_EQ(counts.alice_bases, 6);
    std::uint64_t diagonal = 0;
    for (int k = 0; k < 6; ++k) {
        for (int a = 0; a < 5; ++a) {
            for (int b = 0; b < 5; ++b) {
                if (a != b) EXPECT_EQ(counts(a, b, k, k), 0u);
                if (a == b) diagonal += counts(a, b, k, k);
            }
        }
    }
    EXPECT_GT(diagonal, 0u);
    EXPECT_FALSE(fs::exists(dir / "session.jsonl"));
}

TEST(CliSimulate, ZeroRatesWarnAndKeyrateNamesMissingState) {
    fs::path dir = scratch("sim_zero");
    Result r = run({"simulate", "--d", "4", "--pair-rate", "0", "--rounds", "0", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    hdqkd::protocol::CountTable counts = hdqkd::protocol::read_count_table(dir / "counts.csv");
    for (auto c : counts.counts) EXPECT_EQ(c, 0u);
    Result k = run({"keyrate", "--counts", (dir / "counts.csv").string(), "--out", dir.string()});
    EXPECT_EQ(k.code, 1);
    EXPECT_NE(k.err.find("insufficient-data"), std::string::npos);
    EXPECT_NE(k.err.find("b=1"), std::string::npos);
}

TEST(CliSimulate, BlockNoiseNeedsSquareDimension) {
    fs::path dir = scratch("sim_block_prime");
    EXPECT_EQ(run({"simulate", "--d", "5", "--bases", "wh-all", "--Eu", "0.1", "--Eb", "0.1", "--out", dir.string()})
                  .code,
              2);
    EXPECT_EQ(run({"simulate", "--d", "25", "--Et", "1.5", "--out", dir.string()}).code, 2);
}

TEST(CliPipeline, SimulatedCountsGiveReferenceRate) {
    fs::path dir = scratch("pipeline");
    ASSERT_EQ(run({"simulate", "--d", "25", "--Eu", "0.073", "--Eb", "0.248", "--rounds", "0", "--seed", "3",
                   "--out", dir.string(), "--quiet"})
                  .code,
              0);
    Result r = run({"keyrate", "--counts", (dir / "counts.csv").string(), "--bound", "two-mub-block", "--out",
                    dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(printed_value(r.out, "rate: "), 0.816, 0.05);
    json dec = read_json(dir / "decomposition.json");
    ASSERT_EQ(dec.at("settings").size(), 2u);
    EXPECT_EQ(dec.at("settings")[1].at("alignment"), "column");
}

TEST(CliOptics, ZeroStackEvaluatesNearIdentity) {
    fs::path dir = scratch("optics_zero");
    Result r = run({"optics", "eval", "--stack", "zeros", "--transform", "identity", "--out", dir.string(), "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    json m = read_json(dir / "eval_metrics.json");
    EXPECT_GT(m.at("fidelity").get<double>(), 0.99);
    EXPECT_LT(m.at("mean_crosstalk").get<double>(), 0.01);
}

TEST(CliOptics, DesignWritesStackAndMetrics) {
    fs::path dir = scratch("optics_design");
    Result r = run({"optics", "design", "--planes", "3", "--iterations", "2", "--pgm", "--out", dir.string(),
                    "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
    hdqkd::optics::PhaseMaskStack stack = hdqkd::optics::read_mask_stack(dir / "stack.mplc");
    EXPECT_EQ(stack.planes(), 3);
    EXPECT_DOUBLE_EQ(stack.plane_spacing(), 43.5e-3);
    EXPECT_TRUE(fs::exists(dir / "mask_3.pgm"));
    json m = read_json(dir / "metrics.json");
    EXPECT_EQ(m.at("history").size(), 2u);
    EXPECT_GE(m.at("matching_fidelity").get<double>(), m.at("zero_stack_matching_fidelity").get<double>());
    EXPECT_NEAR(m.at("annotations").at("reported_device_loss_db").get<double>(), 10.7, 1e-12);

    Result e = run({"optics", "eval", "--out", dir.string(), "--quiet"});
    ASSERT_EQ(e.code, 0) << e.err;
    json em = read_json(dir / "eval_metrics.json");
    EXPECT_DOUBLE_EQ(em.at("fidelity").get<double>(), m.at("fidelity").get<double>());
}

TEST(CliOptics, GeometryAndSamplingErrorsExitTwo) {
    fs::path dir = scratch("optics_errors");
    Result overlap = run({"optics", "design", "--spacing", "150e-6", "--out", dir.string()});
    EXPECT_EQ(overlap.code, 2);
    EXPECT_NE(overlap.err.find("geometry-error"), std::string::npos);
    Result sampling = run({"optics", "design", "--nx", "64", "--ny", "64", "--out", dir.string()});
    EXPECT_EQ(sampling.code, 2);
    EXPECT_NE(sampling.err.find("at least 113 pixels"), std::string::npos);
    EXPECT_EQ(run({"optics", "design", "--transform", "fourier", "--out", dir.string()}).code, 2);
    EXPECT_EQ(run({"optics", "eval", "--stack", (dir / "none.mplc").string(), "--out", dir.string()}).code, 2);
}

}  // namespace
