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

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace hdqkd::optics {

using Complex = std::complex<double>;

/// Sampling grid of a transverse plane. Tables are nx rows by ny columns,
/// stored row-major (index = ix * ny + iy). x runs along rows, y along columns.
struct GridSpec {
    int nx = 0;
    int ny = 0;
    double pitch = 0.0;       // meters per pixel
    double wavelength = 0.0;  // meters

    /// Throws geometry-error on nx, ny < 8 or non-positive pitch/wavelength.
    void validate() const;

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    double x(int ix) const { return (ix - 0.5 * (nx - 1)) * pitch; }
    double y(int iy) const { return (iy - 0.5 * (ny - 1)) * pitch; }

    bool operator==(const GridSpec &) const = default;
};

class OpticalField {
  public:
    OpticalField() = default;
    explicit OpticalField(const GridSpec &grid);
    OpticalField(const GridSpec &grid, std::vector<Complex> amplitude);

    const GridSpec &grid() const { return grid_; }
    std::span<Complex> data() { return amplitude_; }
    std::span<const Complex> data() const { return amplitude_; }

    Complex &operator()(int ix, int iy) { return amplitude_[index(ix, iy)]; }
    const Complex &operator()(int ix, int iy) const { return amplitude_[index(ix, iy)]; }

    /// Sum of |amplitude|^2 * pitch^2.
    double power() const;

  private:
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(ix) * static_cast<std::size_t>(grid_.ny) +
               static_cast<std::size_t>(iy);
    }

    GridSpec grid_{};
    std::vector<Complex> amplitude_;
};

/// <a|b> = sum conj(a) * b * pitch^2. Throws geometry-error on grid mismatch.
Complex inner_product(const OpticalField &a, const OpticalField &b);

/// Maps any real phase into [0, 2 pi).
double wrap_phase(double phase);

using PhaseTable = std::vector<double>;

/// Ordered phase masks with uniform spacing between consecutive planes.
class PhaseMaskStack {
  public:
    /// Phases are wrapped into [0, 2 pi). Throws geometry-error if a mask does
    /// not match the grid, invalid-config on an empty stack or bad spacing.
    PhaseMaskStack(const GridSpec &grid, std::vector<PhaseTable> masks, double plane_spacing);

    static PhaseMaskStack zeros(const GridSpec &grid, int planes, double plane_spacing);

    const GridSpec &grid() const { return grid_; }
    int planes() const { return static_cast<int>(masks_.size()); }
    double plane_spacing() const { return plane_spacing_; }
    const PhaseTable &mask(int p) const { return masks_[static_cast<std::size_t>(p)]; }
    const std::vector<PhaseTable> &masks() const { return masks_; }

    /// Replaces mask p, wrapping phases into [0, 2 pi).
    void set_mask(int p, PhaseTable phases);

  private:
    GridSpec grid_;
    std::vector<PhaseTable> masks_;
    double plane_spacing_;
};

struct PropagationOptions {
    /// Zero-padding factor per axis. 1 gives periodic (circular) propagation.
    int pad_factor = 2;
};

struct PropagationStats {
    /// Share of input power carried by evanescent components (suppressed).
    double evanescent_fraction = 0.0;
    /// Share of input power that left the unpadded window and was cropped.
    double window_loss_fraction = 0.0;
};

/// Largest |distance| for which the sampled angular-spectrum transfer
/// function is free of phase aliasing: N * pitch^2 / wavelength with N the
/// smaller padded axis length.
double max_propagation_distance(const GridSpec &grid, const PropagationOptions &options = {});

/// Throws sampling-error naming the minimum grid size if `distance` exceeds
/// max_propagation_distance.
void check_sampling(const GridSpec &grid, double distance, const PropagationOptions &options = {});

class FftPlan2d;

/// Angular-spectrum propagation over a fixed distance. The transfer function
/// exp(i z sqrt(k^2 - kx^2 - ky^2)) is precomputed; evanescent components are
/// zeroed. Safe to call concurrently from several threads.
class Propagator {
  public:
    Propagator(const GridSpec &grid, double distance, const PropagationOptions &options = {});

    OpticalField operator()(const OpticalField &field) const { return apply(field, nullptr); }
    OpticalField apply(const OpticalField &field, PropagationStats *stats) const;

    const GridSpec &grid() const { return grid_; }
    double distance() const { return distance_; }

  private:
    GridSpec grid_;
    double distance_;
    int padded_nx_;
    int padded_ny_;
    std::vector<Complex> transfer_;
    std::vector<bool> evanescent_;
    std::shared_ptr<const FftPlan2d> plan_;
};

OpticalField propagate(const OpticalField &field, double distance,
                       const PropagationOptions &options = {});
OpticalField propagate(const OpticalField &field, double distance,
                       const PropagationOptions &options, PropagationStats &stats);

/// Pointwise multiplication by exp(i * phase). Throws geometry-error on a
/// shape mismatch.
OpticalField apply_mask(const OpticalField &field, std::span<const double> phase);
OpticalField apply_mask(const OpticalField &field, const PhaseMaskStack &stack, int plane);

/// Mask 1, propagate one spacing, ..., mask P, propagate one spacing, then one
/// final spacing to the detection plane: P + 1 propagations in total.
OpticalField forward_pass(const PhaseMaskStack &stack, const OpticalField &field,
                          const PropagationOptions &options = {});

enum class Arrangement { Square, Line };

struct ApertureLayout {
    int count = 1;
    double radius = 0.0;
    double spacing = 0.0;
    Arrangement arrangement = Arrangement::Square;

    /// Throws geometry-error on overlapping apertures, invalid-config on a
    /// non-square count for the square arrangement.
    void validate() const;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Aperture centers in meters relative to the grid center. Square layouts use
/// the grid order (row k along x, column l along y), so aperture
/// (k - 1) * sqrt(d) + l matches computational mode (k, l).
std::vector<Point> aperture_centers(const ApertureLayout &layout);

/// Uniform disk centered at `center` (pixels with distance < radius), scaled
/// to unit power.
OpticalField disk_mode(const GridSpec &grid, Point center, double radius);

/// One unit-power disk per aperture. Throws geometry-error if an aperture
/// comes within two pixels of the grid edge or covers no pixel.
std::vector<OpticalField> make_aperture_modes(const ApertureLayout &layout, const GridSpec &grid);

}  // namespace hdqkd::optics
