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

#include "hdqkd/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "hdqkd/error.hpp"
#include "hdqkd/mub.hpp"

namespace hdqkd::optics {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_grid(const GridSpec &a, const GridSpec &b, const char *what) {
    if (!(a == b)) {
        std::ostringstream msg;
        msg << what << ": grid mismatch (" << a.nx << "x" << a.ny << " vs " << b.nx << "x" << b.ny
            << ")";
        throw Error(ErrorKind::GeometryError, msg.str());
    }
}

// Signed FFT frequency index for bin i of an n-point transform.
int signed_bin(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

}  // namespace

void GridSpec::validate() const {
    if (nx < 8 || ny < 8) {
        throw Error(ErrorKind::GeometryError, "grid must be at least 8x8 pixels, got " +
                                                  std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (!(pitch > 0.0) || !(wavelength > 0.0)) {
        throw Error(ErrorKind::GeometryError, "pixel pitch and wavelength must be positive");
    }
}

OpticalField::OpticalField(const GridSpec &grid) : grid_(grid), amplitude_(grid.size()) {
    grid_.validate();
}

OpticalField::OpticalField(const GridSpec &grid, std::vector<Complex> amplitude)
    : grid_(grid), amplitude_(std::move(amplitude)) {
    grid_.validate();
    if (amplitude_.size() != grid_.size()) {
        throw Error(ErrorKind::GeometryError, "field table does not match the grid size");
    }
}

double OpticalField::power() const {
    double sum = 0.0;
    for (const Complex &a : amplitude_) sum += std::norm(a);
    return sum * grid_.pitch * grid_.pitch;
}

Complex inner_product(const OpticalField &a, const OpticalField &b) {
    require_same_grid(a.grid(), b.grid(), "inner product");
    Complex sum{};
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) sum += std::conj(da[i]) * db[i];
    return sum * (a.grid().pitch * a.grid().pitch);
}

double wrap_phase(double phase) {
    double w = std::fmod(phase, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

PhaseMaskStack::PhaseMaskStack(const GridSpec &grid, std::vector<PhaseTable> masks,
                               double plane_spacing)
    : grid_(grid), masks_(std::move(masks)), plane_spacing_(plane_spacing) {
    grid_.validate();
    if (masks_.empty()) throw Error(ErrorKind::InvalidConfig, "a mask stack needs at least one plane");
    if (!std::isfinite(plane_spacing_) || plane_spacing_ <= 0.0) {
        throw Error(ErrorKind::InvalidConfig, "plane spacing must be positive");
    }
    for (PhaseTable &mask : masks_) {
        if (mask.size() != grid_.size()) {
            throw Error(ErrorKind::GeometryError, "phase mask does not match the grid size");
        }
        for (double &phi : mask) phi = wrap_phase(phi);
    }
}

PhaseMaskStack PhaseMaskStack::zeros(const GridSpec &grid, int planes, double plane_spacing) {
    if (planes < 1) throw Error(ErrorKind::InvalidConfig, "a mask stack needs at least one plane");
    return PhaseMaskStack(grid, std::vector<PhaseTable>(static_cast<std::size_t>(planes),
                                                        PhaseTable(grid.size(), 0.0)),
                          plane_spacing);
}

void PhaseMaskStack::set_mask(int p, PhaseTable phases) {
    if (phases.size() != grid_.size()) {
        throw Error(ErrorKind::GeometryError, "phase mask does not match the grid size");
    }
    for (double &phi : phases) phi = wrap_phase(phi);
    masks_.at(static_cast<std::size_t>(p)) = std::move(phases);
}

double max_propagation_distance(const GridSpec &grid, const PropagationOptions &options) {
    const int n = std::min(grid.nx, grid.ny) * options.pad_factor;
    return static_cast<double>(n) * grid.pitch * grid.pitch / grid.wavelength;
}

void check_sampling(const GridSpec &grid, double distance, const PropagationOptions &options) {
    grid.validate();
    if (options.pad_factor < 1) throw Error(ErrorKind::InvalidConfig, "pad factor must be >= 1");
    if (!std::isfinite(distance)) throw Error(ErrorKind::InvalidInput, "distance must be finite");
    const double limit = max_propagation_distance(grid, options);
    if (std::abs(distance) > limit) {
        const double needed = std::abs(distance) * grid.wavelength /
                              (grid.pitch * grid.pitch * options.pad_factor);
        const long long min_pixels = static_cast<long long>(std::ceil(needed));
        std::ostringstream msg;
        msg << "propagation distance " << distance << " m exceeds the alias-free limit " << limit
            << " m for a " << grid.nx << "x" << grid.ny << " grid at pitch " << grid.pitch
            << " m; use at least " << min_pixels << " pixels along each axis"
            << " (or a larger pitch / shorter step)";
        throw Error(ErrorKind::SamplingError, msg.str());
    }
}

Propagator::Propagator(const GridSpec &grid, double distance, const PropagationOptions &options)
    : grid_(grid), distance_(distance) {
    check_sampling(grid, distance, options);
    padded_nx_ = grid.nx * options.pad_factor;
    padded_ny_ = grid.ny * options.pad_factor;
    const std::size_t n = static_cast<std::size_t>(padded_nx_) * static_cast<std::size_t>(padded_ny_);
    transfer_.resize(n);
    evanescent_.resize(n);
    const double inv_lambda_sq = 1.0 / (grid.wavelength * grid.wavelength);
    const double dfx = 1.0 / (padded_nx_ * grid.pitch);
    const double dfy = 1.0 / (padded_ny_ * grid.pitch);
    for (int i = 0; i < padded_nx_; ++i) {
        const double fx = signed_bin(i, padded_nx_) * dfx;
        for (int j = 0; j < padded_ny_; ++j) {
            const double fy = signed_bin(j, padded_ny_) * dfy;
            const double arg = inv_lambda_sq - fx * fx - fy * fy;
            const std::size_t idx = static_cast<std::size_t>(i) * padded_ny_ + j;
            if (arg > 0.0) {
                transfer_[idx] = std::polar(1.0, kTwoPi * distance * std::sqrt(arg));
            } else {
                transfer_[idx] = 0.0;
                evanescent_[idx] = true;
            }
        }
    }
    plan_ = FftPlan2d::get(padded_nx_, padded_ny_);
}

OpticalField Propagator::apply(const OpticalField &field, PropagationStats *stats) const {
    require_same_grid(grid_, field.grid(), "propagate");
    const std::size_t n = transfer_.size();
    FftBuffer work = make_fft_buffer(n);
    std::fill(work.get(), work.get() + n, Complex{});
    const int ox = (padded_nx_ - grid_.nx) / 2;
    const int oy = (padded_ny_ - grid_.ny) / 2;
    const auto in = field.data();
    for (int ix = 0; ix < grid_.nx; ++ix) {
        std::copy_n(in.data() + static_cast<std::size_t>(ix) * grid_.ny, grid_.ny,
                    work.get() + static_cast<std::size_t>(ix + ox) * padded_ny_ + oy);
    }

    plan_->forward(work.get());
    double spectral_total = 0.0;
    double spectral_evanescent = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (stats != nullptr) {
            const double p = std::norm(work[i]);
            spectral_total += p;
            if (evanescent_[i]) spectral_evanescent += p;
        }
        work[i] *= transfer_[i];
    }
    plan_->inverse(work.get());

    const double scale = 1.0 / static_cast<double>(n);
    OpticalField out(grid_);
    auto dst = out.data();
    double kept = 0.0;
    for (int ix = 0; ix < grid_.nx; ++ix) {
        const Complex *row = work.get() + static_cast<std::size_t>(ix + ox) * padded_ny_ + oy;
        Complex *out_row = dst.data() + static_cast<std::size_t>(ix) * grid_.ny;
        for (int iy = 0; iy < grid_.ny; ++iy) {
            out_row[iy] = row[iy] * scale;
            kept += std::norm(out_row[iy]);
        }
    }

    if (stats != nullptr) {
        // Parseval: spectral power is n times spatial power for FFTW's convention.
        const double input_power = spectral_total / static_cast<double>(n);
        if (input_power > 0.0) {
            stats->evanescent_fraction = spectral_evanescent / spectral_total;
            const double propagated = (spectral_total - spectral_evanescent) / static_cast<double>(n);
            stats->window_loss_fraction = std::max(0.0, (propagated - kept) / input_power);
        } else {
            *stats = PropagationStats{};
        }
    }
    return out;
}

OpticalField propagate(const OpticalField &field, double distance, const PropagationOptions &options) {
    return Propagator(field.grid(), distance, options)(field);
}

OpticalField propagate(const OpticalField &field, double distance, const PropagationOptions &options,
                       PropagationStats &stats) {
    return Propagator(field.grid(), distance, options).apply(field, &stats);
}

OpticalField apply_mask(const OpticalField &field, std::span<const double> phase) {
    if (phase.size() != field.grid().size()) {
        throw Error(ErrorKind::GeometryError, "phase table does not match the field grid");
    }
    OpticalField out = field;
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= std::polar(1.0, phase[i]);
    return out;
}

OpticalField apply_mask(const OpticalField &field, const PhaseMaskStack &stack, int plane) {
    require_same_grid(stack.grid(), field.grid(), "apply_mask");
    return apply_mask(field, stack.mask(plane));
}

OpticalField forward_pass(const PhaseMaskStack &stack, const OpticalField &field,
                          const PropagationOptions &options) {
    require_same_grid(stack.grid(), field.grid(), "forward_pass");
    const Propagator step(stack.grid(), stack.plane_spacing(), options);
    OpticalField current = field;
    for (int p = 0; p < stack.planes(); ++p) {
        current = step(apply_mask(current, stack.mask(p)));
    }
    return step(current);
}

void ApertureLayout::validate() const {
    if (count < 1) throw Error(ErrorKind::InvalidConfig, "aperture count must be >= 1");
    if (!(radius > 0.0)) throw Error(ErrorKind::GeometryError, "aperture radius must be positive");
    if (count > 1 && !(spacing >= 2.0 * radius)) {
        throw Error(ErrorKind::GeometryError, "apertures overlap: spacing must be >= 2 * radius");
    }
    if (arrangement == Arrangement::Square && mub::exact_sqrt(count) == 0) {
        throw Error(ErrorKind::InvalidConfig,
                    "square arrangement needs a perfect-square aperture count, got " +
                        std::to_string(count));
    }
}

std::vector<Point> aperture_centers(const ApertureLayout &layout) {
    layout.validate();
    std::vector<Point> centers;
    centers.reserve(static_cast<std::size_t>(layout.count));
    if (layout.arrangement == Arrangement::Line) {
        for (int l = 0; l < layout.count; ++l) {
            centers.push_back({0.0, (l - 0.5 * (layout.count - 1)) * layout.spacing});
        }
        return centers;
    }
    const int side = mub::exact_sqrt(layout.count);
    for (int k = 0; k < side; ++k) {
        for (int l = 0; l < side; ++l) {
            centers.push_back({(k - 0.5 * (side - 1)) * layout.spacing,
                               (l - 0.5 * (side - 1)) * layout.spacing});
        }
    }
    return centers;
}

OpticalField disk_mode(const GridSpec &grid, Point center, double radius) {
    OpticalField mode(grid);
    const double r2 = radius * radius;
    std::size_t pixels = 0;
    for (int ix = 0; ix < grid.nx; ++ix) {
        const double dx = grid.x(ix) - center.x;
        for (int iy = 0; iy < grid.ny; ++iy) {
            const double dy = grid.y(iy) - center.y;
            if (dx * dx + dy * dy < r2) {
                mode(ix, iy) = 1.0;
                ++pixels;
            }
        }
    }
    if (pixels == 0) throw Error(ErrorKind::GeometryError, "aperture covers no pixel");
    const double amplitude = 1.0 / (std::sqrt(static_cast<double>(pixels)) * grid.pitch);
    for (Complex &a : mode.data()) a *= amplitude;
    return mode;
}

std::vector<OpticalField> make_aperture_modes(const ApertureLayout &layout, const GridSpec &grid) {
    grid.validate();
    const std::vector<Point> centers = aperture_centers(layout);
    const double half_x = (0.5 * (grid.nx - 1) - 2.0) * grid.pitch;
    const double half_y = (0.5 * (grid.ny - 1) - 2.0) * grid.pitch;
    std::vector<OpticalField> modes;
    modes.reserve(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const Point c = centers[i];
        if (std::abs(c.x) + layout.radius > half_x || std::abs(c.y) + layout.radius > half_y) {
            std::ostringstream msg;
            msg << "aperture " << i + 1 << " at (" << c.x << ", " << c.y
                << ") m does not fit inside the grid with a 2-pixel margin";
            throw Error(ErrorKind::GeometryError, msg.str());
        }
        modes.push_back(disk_mode(grid, c, layout.radius));
    }
    return modes;
}

}  // namespace hdqkd::optics
