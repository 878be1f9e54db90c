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

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "hdqkd/optics.hpp"

namespace hdqkd::optics {

// Little-endian container:
//   char[4] magic, u32 version, u32 nx, u32 ny, u32 count,
//   f64 pitch, f64 wavelength, f64 spacing,
//   then `count` planes of nx*ny values, row-major.
// Mask stacks use magic "MPLC" and one f64 phase per pixel. Fields use magic
// "MPLF", spacing 0, and interleaved (re, im) f64 pairs.
inline constexpr std::uint32_t kContainerVersion = 1;

void write_mask_stack(std::ostream &out, const PhaseMaskStack &stack);
PhaseMaskStack read_mask_stack(std::istream &in);
void write_mask_stack(const std::filesystem::path &path, const PhaseMaskStack &stack);
PhaseMaskStack read_mask_stack(const std::filesystem::path &path);

void write_fields(std::ostream &out, const std::vector<OpticalField> &fields);
std::vector<OpticalField> read_fields(std::istream &in);
void write_fields(const std::filesystem::path &path, const std::vector<OpticalField> &fields);
std::vector<OpticalField> read_fields(const std::filesystem::path &path);

/// Binary 16-bit portable graymap (P5, maxval 65535), ny columns by nx rows,
/// phase mapped linearly from [0, 2 pi) onto 0..65535.
void write_phase_pgm(const std::filesystem::path &path, const GridSpec &grid, const PhaseTable &phase);

}  // namespace hdqkd::optics
