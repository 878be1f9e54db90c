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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdqkd/error.hpp"

namespace hdqkd::cli {

using nlohmann::json;

/// Version of the config file layout (top-level "schema_version").
inline constexpr int kSchemaVersion = 1;

/// Environment variable that replaces the default output directory ".".
inline constexpr const char *kOutDirEnv = "HDQKD_OUT_DIR";

/// State shared by all commands after the global flags are resolved.
struct Context {
    std::filesystem::path out_dir;
    std::uint64_t seed = 1;
    bool quiet = false;
    std::ostream *out = nullptr;
    std::ostream *err = nullptr;

    /// Progress and result lines; suppressed by --quiet.
    void note(const std::string &line) const;
    /// Always printed to the error stream.
    void warn(const std::string &line) const;
};

/// Binds command-line flags to keys of a command's config section so flags
/// can be layered over the file after parsing.
class FlagBindings {
  public:
    enum class Kind { Int, UInt, Double, String, Bool };

    /// `pointer` is a JSON pointer into the section, e.g. "/grid/pitch".
    CLI::Option *add(CLI::App &app, const std::string &flag, const std::string &pointer, Kind kind,
                     const std::string &help);

    /// Writes every flag that was given on the command line into `section`.
    void apply(json &section) const;

    bool given(const std::string &pointer) const;

  private:
    struct Entry {
        CLI::Option *option = nullptr;
        std::string text;
        std::string pointer;
        Kind kind = Kind::String;
    };
    std::vector<std::unique_ptr<Entry>> entries_;
};

/// Throws invalid-config with `where` naming the offending key.
[[noreturn]] void config_error(const std::string &where, const std::string &what);

int get_int(const json &section, const std::string &key, const std::string &where);
double get_double(const json &section, const std::string &key, const std::string &where);
std::string get_string(const json &section, const std::string &key, const std::string &where);
std::uint64_t get_uint(const json &section, const std::string &key, const std::string &where);
bool has_value(const json &section, const std::string &key);

/// `defaults` patched with the config file section and then with the flags.
json resolve_section(const json &defaults, const json &config, const std::string &name,
                     const FlagBindings &flags);

/// Writes resolved_config.<command>.json in the output directory. The file
/// has the config layout, so `--config` on it repeats the run.
void write_resolved_config(const Context &ctx, const std::string &command, const std::string &section_name,
                           const json &section);

std::string format_double(double value, int digits = 6);

int run_mub_gen(const Context &ctx, const json &section);
int run_mub_check(const Context &ctx, const json &section);
int run_optics(const Context &ctx, const json &section, bool design);
int run_simulate(const Context &ctx, const json &section);
int run_keyrate(const Context &ctx, const json &section);

json mub_defaults();
json optics_defaults();
json simulate_defaults();
json keyrate_defaults();

}  // namespace hdqkd::cli
