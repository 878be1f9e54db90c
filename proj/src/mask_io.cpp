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

#include "hdqkd/mask_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "hdqkd/error.hpp"

namespace hdqkd::optics {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::ostream &out, T value) {
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream &in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), bytes.size())) {
        throw Error(ErrorKind::InvalidInput, "truncated mask/field container");
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

struct Header {
    GridSpec grid;
    std::uint32_t count = 0;
    double spacing = 0.0;
};

void write_header(std::ostream &out, const char (&magic)[5], const GridSpec &grid,
                  std::uint32_t count, double spacing) {
    out.write(magic, 4);
    put<std::uint32_t>(out, kContainerVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.nx));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.ny));
    put<std::uint32_t>(out, count);
    put<double>(out, grid.pitch);
    put<double>(out, grid.wavelength);
    put<double>(out, spacing);
}

Header read_header(std::istream &in, const char (&magic)[5]) {
    char found[4];
    if (!in.read(found, 4) || std::memcmp(found, magic, 4) != 0) {
        throw Error(ErrorKind::InvalidInput, std::string("bad container magic, expected ") + magic);
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kContainerVersion) {
        throw Error(ErrorKind::InvalidInput, "unsupported container version " + std::to_string(version));
    }
    Header h;
    h.grid.nx = static_cast<int>(get<std::uint32_t>(in));
    h.grid.ny = static_cast<int>(get<std::uint32_t>(in));
    h.count = get<std::uint32_t>(in);
    h.grid.pitch = get<double>(in);
    h.grid.wavelength = get<double>(in);
    h.spacing = get<double>(in);
    h.grid.validate();
    return h;
}

std::ofstream open_out(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return in;
}

}  // namespace

void write_mask_stack(std::ostream &out, const PhaseMaskStack &stack) {
    write_header(out, "MPLC", stack.grid(), static_cast<std::uint32_t>(stack.planes()),
                 stack.plane_spacing());
    for (const PhaseTable &mask : stack.masks()) {
        for (double phi : mask) put<double>(out, phi);
    }
}

PhaseMaskStack read_mask_stack(std::istream &in) {
    const Header h = read_header(in, "MPLC");
    std::vector<PhaseTable> masks(h.count, PhaseTable(h.grid.size()));
    for (PhaseTable &mask : masks) {
        for (double &phi : mask) phi = get<double>(in);
    }
    return PhaseMaskStack(h.grid, std::move(masks), h.spacing);
}

void write_mask_stack(const std::filesystem::path &path, const PhaseMaskStack &stack) {
    std::ofstream out = open_out(path);
    write_mask_stack(out, stack);
}

PhaseMaskStack read_mask_stack(const std::filesystem::path &path) {
    std::ifstream in = open_in(path);
    return read_mask_stack(in);
}

void write_fields(std::ostream &out, const std::vector<OpticalField> &fields) {
    if (fields.empty()) throw Error(ErrorKind::InvalidInput, "no fields to write");
    const GridSpec grid = fields.front().grid();
    write_header(out, "MPLF", grid, static_cast<std::uint32_t>(fields.size()), 0.0);
    for (const OpticalField &f : fields) {
        if (!(f.grid() == grid)) throw Error(ErrorKind::GeometryError, "fields must share one grid");
        for (const Complex &a : f.data()) {
            put<double>(out, a.real());
            put<double>(out, a.imag());
        }
    }
}

std::vector<OpticalField> read_fields(std::istream &in) {
    const Header h = read_header(in, "MPLF");
    std::vector<OpticalField> fields;
    fields.reserve(h.count);
    for (std::uint32_t c = 0; c < h.count; ++c) {
        std::vector<Complex> data(h.grid.size());
        for (Complex &a : data) {
            const double re = get<double>(in);
            const double im = get<double>(in);
            a = Complex(re, im);
        }
        fields.emplace_back(h.grid, std::move(data));
    }
    return fields;
}

void write_fields(const std::filesystem::path &path, const std::vector<OpticalField> &fields) {
    std::ofstream out = open_out(path);
    write_fields(out, fields);
}

std::vector<OpticalField> read_fields(const std::filesystem::path &path) {
    std::ifstream in = open_in(path);
    return read_fields(in);
}

void write_phase_pgm(const std::filesystem::path &path, const GridSpec &grid, const PhaseTable &phase) {
    if (phase.size() != grid.size()) throw Error(ErrorKind::GeometryError, "phase table does not match grid");
    std::ofstream out = open_out(path);
    out << "P5\n" << grid.ny << ' ' << grid.nx << "\n65535\n";
    for (double phi : phase) {
        const double scaled = std::round(wrap_phase(phi) / (2.0 * std::numbers::pi) * 65535.0);
        const auto v = static_cast<std::uint16_t>(std::clamp(scaled, 0.0, 65535.0));
        // PGM samples are big-endian.
        const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
        out.write(bytes, 2);
    }
}

}  // namespace hdqkd::optics
