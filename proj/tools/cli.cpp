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

#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli_common.hpp"

namespace hdqkd::cli {
namespace fs = std::filesystem;

void Context::note(const std::string &line) const {
    if (!quiet) *out << line << '\n';
}

void Context::warn(const std::string &line) const { *err << "warning: " << line << '\n'; }

CLI::Option *FlagBindings::add(CLI::App &app, const std::string &flag, const std::string &pointer, Kind kind,
                               const std::string &help) {
    auto entry = std::make_unique<Entry>();
    entry->pointer = pointer;
    entry->kind = kind;
    if (kind == Kind::Bool) {
        entry->option = app.add_flag(flag, help);
    } else {
        entry->option = app.add_option(flag, entry->text, help);
    }
    CLI::Option *option = entry->option;
    entries_.push_back(std::move(entry));
    return option;
}

namespace {

json convert_flag(const std::string &flag, const std::string &text, FlagBindings::Kind kind) {
    using Kind = FlagBindings::Kind;
    try {
        std::size_t used = 0;
        switch (kind) {
        case Kind::Int: {
            long long v = std::stoll(text, &used);
            if (used != text.size()) break;
            return v;
        }
        case Kind::UInt: {
            if (!text.empty() && text[0] == '-') break;
            unsigned long long v = std::stoull(text, &used);
            if (used != text.size()) break;
            return static_cast<std::uint64_t>(v);
        }
        case Kind::Double: {
            double v = std::stod(text, &used);
            if (used != text.size()) break;
            return v;
        }
        case Kind::String:
            return text;
        case Kind::Bool:
            return true;
        }
    } catch (const std::logic_error &) {
    }
    throw Error(ErrorKind::InvalidConfig, flag + ": cannot parse '" + text + "'");
}

}  // namespace

void FlagBindings::apply(json &section) const {
    for (const auto &entry : entries_) {
        if (entry->option->count() == 0) continue;
        section[json::json_pointer(entry->pointer)] =
            convert_flag(entry->option->get_name(), entry->text, entry->kind);
    }
}

bool FlagBindings::given(const std::string &pointer) const {
    for (const auto &entry : entries_) {
        if (entry->pointer == pointer && entry->option->count() > 0) return true;
    }
    return false;
}

void config_error(const std::string &where, const std::string &what) {
    throw Error(ErrorKind::InvalidConfig, where + ": " + what);
}

bool has_value(const json &section, const std::string &key) {
    return section.contains(key) && !section.at(key).is_null();
}

namespace {

const json &require(const json &section, const std::string &key, const std::string &where) {
    if (!has_value(section, key)) config_error(where + "." + key, "required value is missing");
    return section.at(key);
}

}  // namespace

int get_int(const json &section, const std::string &key, const std::string &where) {
    const json &v = require(section, key, where);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_number_float() && v.get<double>() == static_cast<int>(v.get<double>())) {
        return static_cast<int>(v.get<double>());
    }
    config_error(where + "." + key, "expected an integer");
}

std::uint64_t get_uint(const json &section, const std::string &key, const std::string &where) {
    const json &v = require(section, key, where);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    config_error(where + "." + key, "expected a non-negative integer");
}

double get_double(const json &section, const std::string &key, const std::string &where) {
    const json &v = require(section, key, where);
    if (!v.is_number()) config_error(where + "." + key, "expected a number");
    return v.get<double>();
}

std::string get_string(const json &section, const std::string &key, const std::string &where) {
    const json &v = require(section, key, where);
    if (!v.is_string()) config_error(where + "." + key, "expected a string");
    return v.get<std::string>();
}

json resolve_section(const json &defaults, const json &config, const std::string &name,
                     const FlagBindings &flags) {
    json section = defaults;
    if (config.contains(name)) {
        if (!config.at(name).is_object()) config_error(name, "section must be an object");
        section.merge_patch(config.at(name));
        // merge_patch drops keys set to null; keep them visible in the snapshot.
        for (const auto &[key, value] : defaults.items()) {
            if (!section.contains(key)) section[key] = nullptr;
        }
    }
    flags.apply(section);
    return section;
}

void write_resolved_config(const Context &ctx, const std::string &command, const std::string &section_name,
                           const json &section) {
    json doc = {{"schema_version", kSchemaVersion},
                {"command", command},
                {"seed", ctx.seed},
                {"out", ctx.out_dir.string()},
                {section_name, section}};
    fs::path path = ctx.out_dir / ("resolved_config." + section_name + ".json");
    std::ofstream file(path);
    if (!file) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    file << doc.dump(2) << '\n';
}

std::string format_double(double value, int digits) {
    std::ostringstream s;
    s.precision(digits);
    s << value;
    return s.str();
}

namespace {

json load_config(const std::string &path) {
    if (path.empty()) return json::object();
    std::ifstream file(path);
    if (!file) throw Error(ErrorKind::InvalidConfig, "cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::exception &e) {
        throw Error(ErrorKind::InvalidConfig, "config file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::InvalidConfig, "config file must hold a JSON object");
    if (!doc.contains("schema_version") || doc.at("schema_version") != kSchemaVersion) {
        throw Error(ErrorKind::InvalidConfig,
                    "config file needs \"schema_version\": " + std::to_string(kSchemaVersion));
    }
    return doc;
}

struct Command {
    CLI::App *app = nullptr;
    FlagBindings flags;
    std::vector<std::string> files;  // mub check only
};

using Kind = FlagBindings::Kind;

void add_mub_flags(Command &cmd) {
    cmd.flags.add(*cmd.app, "--d", "/d", Kind::Int, "Dimension");
    cmd.flags.add(*cmd.app, "--family", "/family", Kind::String,
                  "computational, dft, wh, wh-all or sqrt-pair");
    cmd.flags.add(*cmd.app, "--r", "/r", Kind::Int, "Basis index 2..d+1 for the wh family");
}

void add_optics_flags(Command &cmd) {
    CLI::App &app = *cmd.app;
    cmd.flags.add(app, "--d", "/apertures/count", Kind::Int, "Number of apertures (modes)");
    cmd.flags.add(app, "--nx", "/grid/nx", Kind::Int, "Grid rows");
    cmd.flags.add(app, "--ny", "/grid/ny", Kind::Int, "Grid columns");
    cmd.flags.add(app, "--pitch", "/grid/pitch", Kind::Double, "Pixel pitch in meters");
    cmd.flags.add(app, "--wavelength", "/grid/wavelength", Kind::Double, "Wavelength in meters");
    cmd.flags.add(app, "--radius", "/apertures/radius", Kind::Double, "Aperture radius in meters");
    cmd.flags.add(app, "--spacing", "/apertures/spacing", Kind::Double, "Aperture center spacing in meters");
    cmd.flags.add(app, "--arrangement", "/apertures/arrangement", Kind::String, "square or line");
    cmd.flags.add(app, "--planes", "/planes", Kind::Int, "Number of phase planes");
    cmd.flags.add(app, "--plane-spacing", "/plane_spacing", Kind::Double, "Plane spacing in meters");
    cmd.flags.add(app, "--iterations", "/iterations", Kind::Int, "Wavefront-matching sweeps");
    cmd.flags.add(app, "--pad-factor", "/pad_factor", Kind::Int, "Zero padding per axis (1 = periodic)");
    cmd.flags.add(app, "--threads", "/threads", Kind::Int, "Worker threads (0 = all cores)");
    cmd.flags.add(app, "--transform", "/transform", Kind::String,
                  "identity, dft, row-dft, column-dft or wh:<r>");
    cmd.flags.add(app, "--output-modes", "/output_modes", Kind::String, "propagated-inputs or apertures");
    cmd.flags.add(app, "--stack", "/stack", Kind::String, "Mask container to evaluate, or 'zeros'");
    cmd.flags.add(app, "--pgm", "/pgm", Kind::Bool, "Also write each mask as a 16-bit PGM");
}

void add_simulate_flags(Command &cmd) {
    CLI::App &app = *cmd.app;
    cmd.flags.add(app, "--d", "/d", Kind::Int, "Dimension");
    cmd.flags.add(app, "--bases", "/bases", Kind::String, "sqrt-pair, wh-all or dft-pair");
    cmd.flags.add(app, "--noise", "/noise/kind", Kind::String, "uniform or block");
    cmd.flags.add(app, "--Et", "/noise/E_t", Kind::Double, "Total error (uniform noise)");
    cmd.flags.add(app, "--Eu", "/noise/E_u", Kind::Double, "Uniform error part (block noise)");
    cmd.flags.add(app, "--Eb", "/noise/E_b", Kind::Double, "Block error part (block noise)");
    cmd.flags.add(app, "--pair-rate", "/rates/pair_rate", Kind::Double, "Detected pairs per second per setting");
    cmd.flags.add(app, "--accidental-rate", "/rates/accidental_rate", Kind::Double,
                  "Accidentals per second per setting");
    cmd.flags.add(app, "--time", "/rates/integration_time", Kind::Double, "Integration time per setting (s)");
    cmd.flags.add(app, "--window", "/rates/coincidence_window", Kind::Double, "Coincidence window (s)");
    cmd.flags.add(app, "--rounds", "/rounds", Kind::Int, "Protocol rounds written to session.jsonl");
}

void add_keyrate_flags(Command &cmd) {
    CLI::App &app = *cmd.app;
    cmd.flags.add(app, "--d", "/d", Kind::Int, "Dimension");
    cmd.flags.add(app, "--bound", "/bound", Kind::String, "depolarizing, two-mub-uniform or two-mub-block");
    cmd.flags.add(app, "--E", "/E", Kind::Double, "Mean error rate");
    cmd.flags.add(app, "--Eu", "/E_u", Kind::Double, "Uniform error part");
    cmd.flags.add(app, "--Eb", "/E_b", Kind::Double, "Block error part");
    cmd.flags.add(app, "--counts", "/counts", Kind::String, "Count table CSV from simulate");
    cmd.flags.add(app, "--curve", "/curve", Kind::String, "rate or thresholds");
    cmd.flags.add(app, "--d-range", "/d_range", Kind::String, "Dimension range a:b for threshold curves");
    cmd.flags.add(app, "--profile", "/profile", Kind::String, "uniform, experiment or all-block");
    cmd.flags.add(app, "--block-fraction", "/block_fraction", Kind::Double, "E_b / E_t along a curve");
    cmd.flags.add(app, "--step", "/step", Kind::Double, "Error step of rate curves");
}

int dispatch(const Context &ctx, const json &config, Command &mub_gen, Command &mub_check, Command &optics_design,
             Command &optics_eval, Command &simulate, Command &keyrate) {
    auto finish = [&](const std::string &command, const std::string &name, const json &section, auto &&body) {
        fs::create_directories(ctx.out_dir);
        write_resolved_config(ctx, command, name, section);
        return body(section);
    };
    if (mub_gen.app->parsed()) {
        json section = resolve_section(mub_defaults(), config, "mub", mub_gen.flags);
        return finish("mub gen", "mub", section, [&](const json &s) { return run_mub_gen(ctx, s); });
    }
    if (mub_check.app->parsed()) {
        json section = resolve_section(mub_defaults(), config, "mub", mub_check.flags);
        if (!mub_check.files.empty()) section["files"] = mub_check.files;
        return finish("mub check", "mub", section, [&](const json &s) { return run_mub_check(ctx, s); });
    }
    if (optics_design.app->parsed() || optics_eval.app->parsed()) {
        bool design = optics_design.app->parsed();
        Command &cmd = design ? optics_design : optics_eval;
        json section = resolve_section(optics_defaults(), config, "optics", cmd.flags);
        return finish(design ? "optics design" : "optics eval", "optics", section,
                      [&](const json &s) { return run_optics(ctx, s, design); });
    }
    if (simulate.app->parsed()) {
        json section = resolve_section(simulate_defaults(), config, "simulate", simulate.flags);
        return finish("simulate", "simulate", section, [&](const json &s) { return run_simulate(ctx, s); });
    }
    json section = resolve_section(keyrate_defaults(), config, "keyrate", keyrate.flags);
    return finish("keyrate", "keyrate", section, [&](const json &s) { return run_keyrate(ctx, s); });
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"High-dimensional QKD design and certification tools", "hdqkd"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON config file (schema_version 1)");
    app.add_option("--out", out_dir, std::string("Output directory (default: $") + kOutDirEnv + " or .)");
    CLI::Option *seed_opt = app.add_option("--seed", seed, "Random seed (default 1)");
    app.add_flag("--quiet", quiet, "Only print warnings and errors");

    CLI::App *mub = app.add_subcommand("mub", "Generate or check bases");
    mub->require_subcommand(1);
    Command mub_gen{mub->add_subcommand("gen", "Write basis JSON files"), {}, {}};
    Command mub_check{mub->add_subcommand("check", "Report unitarity and unbiasedness deviations"), {}, {}};
    add_mub_flags(mub_gen);
    add_mub_flags(mub_check);
    mub_check.app->add_option("files", mub_check.files, "Basis JSON files to check");

    CLI::App *optics = app.add_subcommand("optics", "Design or evaluate a multi-plane mode sorter");
    optics->require_subcommand(1);
    Command optics_design{optics->add_subcommand("design", "Run wavefront matching"), {}, {}};
    Command optics_eval{optics->add_subcommand("eval", "Score an existing mask stack"), {}, {}};
    add_optics_flags(optics_design);
    add_optics_flags(optics_eval);

    Command simulate{app.add_subcommand("simulate", "Sample noisy count tables and protocol rounds"), {}, {}};
    add_simulate_flags(simulate);

    Command keyrate{app.add_subcommand("keyrate", "Key rates, thresholds and curves"), {}, {}};
    add_keyrate_flags(keyrate);

    for (CLI::App *sub : {mub_gen.app, mub_check.app, optics_design.app, optics_eval.app, simulate.app,
                          keyrate.app}) {
        sub->fallthrough();
    }
    mub->fallthrough();
    optics->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        json config = load_config(config_path);
        Context ctx;
        ctx.out = &out;
        ctx.err = &err;
        ctx.quiet = quiet;
        if (seed_opt->count() > 0) {
            ctx.seed = seed;
        } else if (config.contains("seed")) {
            ctx.seed = get_uint(config, "seed", "config");
        }
        if (!out_dir.empty()) {
            ctx.out_dir = out_dir;
        } else if (config.contains("out")) {
            ctx.out_dir = get_string(config, "out", "config");
        } else if (const char *env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
            ctx.out_dir = env;
        } else {
            ctx.out_dir = ".";
        }
        return dispatch(ctx, config, mub_gen, mub_check, optics_design, optics_eval, simulate, keyrate);
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return is_usage_error(e.kind()) ? 2 : 1;
    } catch (const fs::filesystem_error &e) {
        err << "error: io-error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, const char *const *argv) { return run(argc, argv, std::cout, std::cerr); }

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    std::vector<const char *> argv;
    argv.push_back("hdqkd");
    for (const auto &a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hdqkd::cli
