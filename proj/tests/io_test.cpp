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
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "hdqkd/error.hpp"
#include "hdqkd/keyrate_io.hpp"
#include "hdqkd/mask_io.hpp"
#include "hdqkd/mub_json.hpp"
#include "hdqkd/table_io.hpp"

using namespace hdqkd;
namespace fs = std::filesystem;

namespace {

class TempDir {
  public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("hdqkd_io_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    fs::path operator/(const std::string &name) const { return path_ / name; }

  private:
    fs::path path_;
};

ErrorKind kind_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an hdqkd::Error";
    return ErrorKind::IoError;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

protocol::ProbabilityTable noisy_pair_table() {
    auto [mub1, mub2] = mub::sqrt_mub_pair(9);
    const std::vector<mub::Basis> alice{mub1, mub2};
    const std::vector<mub::Basis> bob{mub1.conjugate(), mub2.conjugate()};
    const std::vector<protocol::BlockAlignment> align{protocol::BlockAlignment::Row,
                                                      protocol::BlockAlignment::Column};
    return protocol::apply_noise(protocol::ideal_prob_table(alice, bob),
                                 protocol::NoiseModel::block_biased(0.0731, 0.2487), align);
}

}  // namespace

TEST(BasisJson, RoundTripIsExact) {
    TempDir dir;
    const mub::MubSet set = mub::full_mub_set(7);
    for (const mub::Basis &b : set.bases()) {
        const fs::path p = dir / "basis.json";
        mub::write_basis_file(p, b);
        const mub::Basis back = mub::read_basis_file(p);
        EXPECT_EQ(back.label(), b.label());
        EXPECT_TRUE(back.amplitudes() == b.amplitudes());
    }
    const auto [mub1, mub2] = mub::sqrt_mub_pair(25);
    const mub::Basis back = mub::basis_from_json(mub::to_json(mub2));
    EXPECT_TRUE(back.amplitudes() == mub2.amplitudes());
}

TEST(BasisJson, LayoutIsModeRows) {
    const nlohmann::json doc = mub::to_json(mub::dft_basis(3));
    EXPECT_EQ(doc.at("dim"), 3);
    EXPECT_EQ(doc.at("label"), "DFT");
    // Row n = mode n; column k = state k.
    EXPECT_NEAR(doc.at("im")[1][1].get<double>(), std::sin(2.0 * M_PI / 3.0) / std::sqrt(3.0), 1e-15);
}

TEST(BasisJson, SetRoundTrip) {
    const mub::MubSet set = mub::full_mub_set(5);
    const mub::MubSet back = mub::mub_set_from_json(mub::to_json(set));
    ASSERT_EQ(back.size(), 6);
    for (int i = 0; i < 6; ++i) EXPECT_TRUE(back[i].amplitudes() == set[i].amplitudes());
}

TEST(BasisJson, CorruptedDocuments) {
    nlohmann::json doc = mub::to_json(mub::dft_basis(3));
    doc["re"][0][0] = 0.9;
    EXPECT_EQ(kind_of([&] { mub::basis_from_json(doc); }), ErrorKind::InvalidInput);
    EXPECT_NO_THROW(mub::basis_from_json(doc, mub::Validation::Lenient));
    doc["re"][0] = nlohmann::json::array({1.0});
    EXPECT_EQ(kind_of([&] { mub::basis_from_json(doc, mub::Validation::Lenient); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([] { mub::basis_from_json(nlohmann::json{{"dim", 2}}); }), ErrorKind::InvalidInput);
    TempDir dir;
    EXPECT_EQ(kind_of([&] { mub::read_basis_file(dir / "missing.json"); }), ErrorKind::IoError);
}

TEST(MaskContainer, RoundTripIsExact) {
    const optics::GridSpec g{12, 9, 12.5e-6, 810e-9};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-10.0, 10.0);
    std::vector<optics::PhaseTable> masks(3, optics::PhaseTable(g.size()));
    for (auto &m : masks) {
        for (auto &v : m) v = uni(rng);
    }
    const optics::PhaseMaskStack stack(g, masks, 43.5e-3);
    std::stringstream buf;
    optics::write_mask_stack(buf, stack);
    EXPECT_EQ(buf.str().size(), 4 + 4 * 4 + 3 * 8 + 3 * g.size() * 8);
    EXPECT_EQ(buf.str().substr(0, 4), "MPLC");
    const optics::PhaseMaskStack back = optics::read_mask_stack(buf);
    EXPECT_EQ(back.grid(), g);
    EXPECT_EQ(back.plane_spacing(), 43.5e-3);
    for (int p = 0; p < 3; ++p) EXPECT_TRUE(back.mask(p) == stack.mask(p));
}

TEST(MaskContainer, HeaderIsLittleEndian) {
    const optics::GridSpec g{8, 10, 1e-5, 8e-7};
    const optics::PhaseMaskStack stack = optics::PhaseMaskStack::zeros(g, 2, 1e-3);
    std::stringstream buf;
    optics::write_mask_stack(buf, stack);
    const std::string s = buf.str();
    const auto u32 = [&](std::size_t off) {
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[off + static_cast<std::size_t>(i)]);
        return v;
    };
    EXPECT_EQ(u32(4), 1u);
    EXPECT_EQ(u32(8), 8u);
    EXPECT_EQ(u32(12), 10u);
    EXPECT_EQ(u32(16), 2u);
}

TEST(MaskContainer, Corruption) {
    std::stringstream bad("XXXX");
    EXPECT_EQ(kind_of([&] { optics::read_mask_stack(bad); }), ErrorKind::InvalidInput);
    const optics::PhaseMaskStack stack = optics::PhaseMaskStack::zeros({8, 8, 1e-5, 8e-7}, 1, 1e-3);
    std::stringstream buf;
    optics::write_mask_stack(buf, stack);
    std::stringstream truncated(buf.str().substr(0, buf.str().size() - 5));
    EXPECT_EQ(kind_of([&] { optics::read_mask_stack(truncated); }), ErrorKind::InvalidInput);
    std::stringstream as_fields(buf.str());
    EXPECT_EQ(kind_of([&] { optics::read_fields(as_fields); }), ErrorKind::InvalidInput);
}

TEST(FieldContainer, RoundTripIsExact) {
    const optics::GridSpec g{10, 8, 12.5e-6, 810e-9};
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    std::vector<optics::OpticalField> fields;
    for (int m = 0; m < 3; ++m) {
        optics::OpticalField f(g);
        for (auto &v : f.data()) v = {normal(rng), normal(rng)};
        fields.push_back(f);
    }
    TempDir dir;
    optics::write_fields(dir / "fields.bin", fields);
    const auto back = optics::read_fields(dir / "fields.bin");
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t m = 0; m < 3; ++m) {
        EXPECT_EQ(back[m].grid(), g);
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(back[m].data()[i], fields[m].data()[i]);
    }
    EXPECT_EQ(slurp(dir / "fields.bin").substr(0, 4), "MPLF");
}

TEST(PhasePgm, HeaderAndScaling) {
    const optics::GridSpec g{3, 4, 1e-5, 8e-7};
    optics::PhaseTable phase(g.size(), 0.0);
    phase[1] = M_PI;
    phase[11] = 2.0 * M_PI - 1e-12;
    TempDir dir;
    optics::write_phase_pgm(dir / "mask.pgm", g, phase);
    const std::string s = slurp(dir / "mask.pgm");
    const std::string header = "P5\n4 3\n65535\n";
    ASSERT_EQ(s.substr(0, header.size()), header);
    ASSERT_EQ(s.size(), header.size() + 2 * g.size());
    const auto sample = [&](std::size_t i) {
        return (static_cast<unsigned char>(s[header.size() + 2 * i]) << 8) |
               static_cast<unsigned char>(s[header.size() + 2 * i + 1]);
    };
    EXPECT_EQ(sample(0), 0);
    EXPECT_NEAR(sample(1), 32768, 1);
    EXPECT_NEAR(sample(11), 65535, 1);
}

TEST(ProbabilityCsv, RoundTripIsBitExact) {
    TempDir dir;
    const protocol::ProbabilityTable t = noisy_pair_table();
    const fs::path csv = dir / "probs.csv";
    protocol::write_probability_table(csv, t, nlohmann::json{{"note", "x"}});
    const protocol::ProbabilityTable back = protocol::read_probability_table(csv);
    ASSERT_EQ(back.values().size(), t.values().size());
    for (std::size_t i = 0; i < t.values().size(); ++i) EXPECT_EQ(back.values()[i], t.values()[i]);
    const nlohmann::json side = protocol::read_sidecar(csv);
    EXPECT_EQ(side.at("kind"), "probability");
    EXPECT_EQ(side.at("dim"), 9);
    EXPECT_EQ(side.at("note"), "x");
    std::ifstream in(csv);
    std::string header;
    std::string first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "a,b,k,l,value");
    EXPECT_EQ(first.substr(0, 8), "1,1,1,1,");
}

TEST(CountCsv, RoundTripIsExact) {
    TempDir dir;
    const protocol::CountTable c =
        protocol::sample_counts(noisy_pair_table(), protocol::SourceRates{1e5, 300.0, 100.0, 400e-12}, 77);
    const fs::path csv = dir / "counts.csv";
    protocol::write_count_table(csv, c);
    const protocol::CountTable back = protocol::read_count_table(csv);
    EXPECT_EQ(back.counts, c.counts);
    EXPECT_EQ(back.dim, 9);
    EXPECT_EQ(back.alice_bases, 2);
    EXPECT_EQ(back.integration_time, 100.0);
    EXPECT_EQ(back.coincidence_window, 400e-12);
    EXPECT_EQ(back.seed, 77u);
    EXPECT_EQ(back.generator, protocol::generator_id());
    EXPECT_EQ(kind_of([&] { protocol::read_probability_table(csv); }), ErrorKind::InvalidInput);
}

TEST(CountCsv, MalformedFiles) {
    TempDir dir;
    const fs::path csv = dir / "bad.csv";
    {
        std::ofstream out(csv);
        out << "a,b,k,l,value\n1,1,1,1,abc\n";
    }
    {
        std::ofstream out(protocol::sidecar_path(csv));
        out << R"({"kind":"counts","dim":1,"alice_bases":1,"bob_bases":1,"integration_time":1,)"
            << R"("coincidence_window":0,"seed":0,"generator":"g"})";
    }
    EXPECT_EQ(kind_of([&] { protocol::read_count_table(csv); }), ErrorKind::InvalidInput);
    EXPECT_EQ(kind_of([&] { protocol::read_count_table(dir / "absent.csv"); }), ErrorKind::IoError);
    EXPECT_EQ(protocol::sidecar_path(csv), dir / "bad.json");
}

TEST(SessionJsonl, RoundTrip) {
    auto [mub1, mub2] = mub::sqrt_mub_pair(4);
    const std::vector<mub::Basis> bases{mub1, mub2};
    const std::vector<double> weights{0.5, 0.5};
    const protocol::SessionRecord r =
        protocol::simulate_session(bases, weights, 500, protocol::NoiseModel::uniform(0.2), {}, 9);
    std::stringstream buf;
    protocol::write_session_jsonl(buf, r);
    std::string first;
    std::getline(buf, first);
    const nlohmann::json j = nlohmann::json::parse(first);
    EXPECT_EQ(j.at("round"), 1);
    EXPECT_EQ(j.at("alice_basis"), r.alice_basis[0] + 1);
    buf.seekg(0);
    const protocol::SessionRecord back = protocol::read_session_jsonl(buf, 4, 9);
    EXPECT_EQ(back.alice_basis, r.alice_basis);
    EXPECT_EQ(back.bob_basis, r.bob_basis);
    EXPECT_EQ(back.alice_symbol, r.alice_symbol);
    EXPECT_EQ(back.bob_symbol, r.bob_symbol);
    EXPECT_EQ(back.sifted, r.sifted);
    EXPECT_EQ(back.sifted_errors, r.sifted_errors);
    EXPECT_EQ(back.observed_qber, r.observed_qber);
    std::stringstream bad("{\"round\":1}\n");
    EXPECT_EQ(kind_of([&] { protocol::read_session_jsonl(bad, 4, 0); }), ErrorKind::InvalidInput);
}

TEST(Alignment, Names) {
    EXPECT_EQ(protocol::to_string(protocol::BlockAlignment::Column), "column");
    EXPECT_EQ(protocol::alignment_from_string("row"), protocol::BlockAlignment::Row);
    EXPECT_EQ(kind_of([] { protocol::alignment_from_string("diagonal"); }), ErrorKind::InvalidConfig);
}

TEST(KeyRateFiles, ReportAndCurve) {
    TempDir dir;
    const keyrate::KeyRateReport r = keyrate::rate_two_mub(25, 0.073, 0.248);
    keyrate::write_report(dir / "rate.csv", r);
    EXPECT_EQ(slurp(dir / "rate.csv").substr(0, 13), "E_u,E_b,rate\n");
    const nlohmann::json side = nlohmann::json::parse(slurp(dir / "rate.json"));
    EXPECT_EQ(side.at("bound"), "two_mub_block");
    EXPECT_EQ(side.at("rate").get<double>(), r.rate);
    EXPECT_EQ(side.at("tolerances").at("max_bisection"), 200);

    std::vector<double> grid{0.0, 0.1, 0.2, 0.3};
    const auto curve = keyrate::rate_curve(keyrate::Bound::TwoMubBlock, 25, grid, keyrate::SplitProfile::experiment());
    keyrate::write_curve(dir / "curve.csv", keyrate::Bound::TwoMubBlock, 25, keyrate::SplitProfile::experiment(),
                         curve, keyrate::CurveColumns::Split);
    const keyrate::CurveFile back = keyrate::read_curve(dir / "curve.csv");
    ASSERT_EQ(back.points.size(), curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        EXPECT_EQ(back.points[i].uniform_error, curve[i].uniform_error);
        EXPECT_EQ(back.points[i].block_error, curve[i].block_error);
        EXPECT_EQ(back.points[i].rate, curve[i].rate);
    }
    EXPECT_EQ(back.sidecar.at("profile").at("block_fraction"), 0.77);

    keyrate::write_curve(dir / "dep.csv", keyrate::Bound::DepolarizingAllMubs, 5, {}, curve,
                         keyrate::CurveColumns::TotalError);
    const keyrate::CurveFile dep = keyrate::read_curve(dir / "dep.csv");
    for (std::size_t i = 0; i < curve.size(); ++i) {
        EXPECT_EQ(dep.points[i].total_error, curve[i].total_error);
        EXPECT_EQ(dep.points[i].rate, curve[i].rate);
    }
}
