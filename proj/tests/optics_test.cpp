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

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "hdqkd/error.hpp"

using namespace hdqkd;
using namespace hdqkd::optics;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

GridSpec small_grid() { return GridSpec{64, 48, 8e-6, 810e-9}; }

// Sum of a few low spatial frequencies with random complex weights. Periodic
// on the grid and band-limited far below the evanescent cutoff.
OpticalField smooth_field(const GridSpec &g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    OpticalField f(g);
    for (int mx = -3; mx <= 3; ++mx) {
        for (int my = -3; my <= 3; ++my) {
            const Complex w(normal(rng), normal(rng));
            for (int ix = 0; ix < g.nx; ++ix) {
                for (int iy = 0; iy < g.ny; ++iy) {
                    const double ph = kTwoPi * (static_cast<double>(mx) * ix / g.nx + static_cast<double>(my) * iy / g.ny);
                    f(ix, iy) += w * std::polar(1.0, ph);
                }
            }
        }
    }
    return f;
}

OpticalField gaussian(const GridSpec &g, double x0, double y0, double waist, double tilt) {
    OpticalField f(g);
    for (int ix = 0; ix < g.nx; ++ix) {
        for (int iy = 0; iy < g.ny; ++iy) {
            const double dx = g.x(ix) - x0;
            const double dy = g.y(iy) - y0;
            f(ix, iy) = std::exp(-(dx * dx + dy * dy) / (waist * waist)) * std::polar(1.0, tilt * g.x(ix));
        }
    }
    return f;
}

double relative_difference(const OpticalField &a, const OpticalField &b) {
    double diff = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        diff += std::norm(a.data()[i] - b.data()[i]);
        norm += std::norm(b.data()[i]);
    }
    return std::sqrt(diff / norm);
}

ErrorKind kind_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an hdqkd::Error";
    return ErrorKind::IoError;
}

const PropagationOptions kPeriodic{1};

}  // namespace

TEST(GridSpec, Validation) {
    EXPECT_NO_THROW(small_grid().validate());
    EXPECT_EQ(kind_of([] { GridSpec{7, 64, 8e-6, 810e-9}.validate(); }), ErrorKind::GeometryError);
    EXPECT_EQ(kind_of([] { GridSpec{64, 64, 0.0, 810e-9}.validate(); }), ErrorKind::GeometryError);
    EXPECT_EQ(kind_of([] { GridSpec{64, 64, 8e-6, -1.0}.validate(); }), ErrorKind::GeometryError);
}

TEST(Propagate, PlaneWaveGetsGlobalPhase) {
    const GridSpec g = small_grid();
    OpticalField f(g);
    for (auto &v : f.data()) v = Complex(0.3, -0.4);
    for (double z : {0.0, 1e-3, -2.5e-3, 3.5e-3}) {
        const OpticalField out = propagate(f, z, kPeriodic);
        // kz reaches ~3e4 rad, so the reference phase itself carries ~1e-12 rounding.
        const Complex phase = std::polar(1.0, kTwoPi / g.wavelength * z);
        for (std::size_t i = 0; i < f.data().size(); ++i) {
            EXPECT_LT(std::abs(out.data()[i] - f.data()[i] * phase), 1e-10);
        }
    }
}

TEST(Propagate, PowerConservedForSmoothFields) {
    const GridSpec g = small_grid();
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const OpticalField f = smooth_field(g, seed);
        PropagationStats stats;
        const OpticalField out = propagate(f, 3e-3, kPeriodic, stats);
        EXPECT_NEAR(out.power() / f.power(), 1.0, 1e-8);
        EXPECT_LT(stats.evanescent_fraction, 1e-20);
        EXPECT_LT(stats.window_loss_fraction, 1e-8);
    }
}

TEST(Propagate, SemigroupPeriodic) {
    const GridSpec g = small_grid();
    for (unsigned seed = 11; seed <= 15; ++seed) {
        const OpticalField f = smooth_field(g, seed);
        const OpticalField two_steps = propagate(propagate(f, 1.2e-3, kPeriodic), 1.7e-3, kPeriodic);
        const OpticalField one_step = propagate(f, 2.9e-3, kPeriodic);
        EXPECT_LT(relative_difference(two_steps, one_step), 1e-8);
    }
}

TEST(Propagate, InversePeriodic) {
    const GridSpec g = small_grid();
    for (unsigned seed = 21; seed <= 25; ++seed) {
        const OpticalField f = smooth_field(g, seed);
        const OpticalField back = propagate(propagate(f, 2.0e-3, kPeriodic), -2.0e-3, kPeriodic);
        EXPECT_LT(relative_difference(back, f), 1e-8);
    }
}

TEST(Propagate, PaddedIdentitiesForLocalizedBeams) {
    const GridSpec g{96, 96, 8e-6, 810e-9};
    const OpticalField f = gaussian(g, 40e-6, -24e-6, 60e-6, 2e4);
    const OpticalField two_steps = propagate(propagate(f, 1e-3), 1.5e-3);
    const OpticalField one_step = propagate(f, 2.5e-3);
    EXPECT_LT(relative_difference(two_steps, one_step), 1e-8);
    const OpticalField back = propagate(propagate(f, 3e-3), -3e-3);
    EXPECT_LT(relative_difference(back, f), 1e-8);
    PropagationStats stats;
    const OpticalField out = propagate(f, 3e-3, {}, stats);
    EXPECT_NEAR(out.power() / f.power(), 1.0, 1e-8);
    EXPECT_LT(stats.window_loss_fraction, 1e-8);
}

TEST(Propagate, WindowLossIsReported) {
    // A beam tilted hard toward the edge leaves the window.
    const GridSpec g{64, 64, 8e-6, 810e-9};
    const OpticalField f = gaussian(g, 150e-6, 0.0, 30e-6, 3e5);
    PropagationStats stats;
    const OpticalField out = propagate(f, 2e-3, {}, stats);
    EXPECT_GT(stats.window_loss_fraction, 0.01);
    EXPECT_NEAR(out.power() / f.power(), 1.0 - stats.window_loss_fraction - stats.evanescent_fraction, 1e-9);
}

TEST(Propagate, EvanescentFractionIsReported) {
    // Pitch below half a wavelength puts the grid corners past the cutoff.
    const GridSpec g{16, 16, 0.3e-6, 810e-9};
    OpticalField f(g);
    f(8, 8) = 1.0;
    PropagationStats stats;
    propagate(f, 1e-9, {}, stats);
    EXPECT_GT(stats.evanescent_fraction, 0.0);
    EXPECT_LT(stats.evanescent_fraction, 1.0);
}

TEST(Propagate, SamplingErrorNamesMinimumPixels) {
    const GridSpec g{64, 64, 8e-6, 810e-9};
    const double limit = max_propagation_distance(g);
    EXPECT_NEAR(limit, 128 * 64e-12 / 810e-9, 1e-15);
    EXPECT_NO_THROW(check_sampling(g, limit));
    EXPECT_NO_THROW(check_sampling(g, -limit));
    OpticalField f(g);
    f(32, 32) = 1.0;
    try {
        propagate(f, 43.5e-3);
        FAIL() << "expected sampling-error";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::SamplingError);
        // 43.5 mm at 8 um and 810 nm with 2x padding needs 276 pixels per axis.
        const long long needed = static_cast<long long>(std::ceil(43.5e-3 * 810e-9 / (64e-12 * 2)));
        EXPECT_EQ(needed, 276);
        EXPECT_NE(std::string(e.what()).find("at least " + std::to_string(needed) + " pixels"),
                  std::string::npos)
            << e.what();
    }
}

TEST(Propagate, GridMismatchIsGeometryError) {
    const GridSpec g = small_grid();
    const Propagator prop(g, 1e-3);
    const OpticalField other(GridSpec{32, 32, 8e-6, 810e-9});
    EXPECT_EQ(kind_of([&] { prop(other); }), ErrorKind::GeometryError);
}

TEST(ApplyMask, ZeroMaskIsIdentity) {
    const GridSpec g = small_grid();
    const OpticalField f = smooth_field(g, 3);
    const OpticalField out = apply_mask(f, PhaseTable(g.size(), 0.0));
    for (std::size_t i = 0; i < f.data().size(); ++i) EXPECT_EQ(out.data()[i], f.data()[i]);
}

TEST(ApplyMask, ConstantMaskIsGlobalPhase) {
    const GridSpec g = small_grid();
    const OpticalField f = smooth_field(g, 4);
    const double phi = 1.234;
    const OpticalField out = apply_mask(f, PhaseTable(g.size(), phi));
    const Complex phase = std::polar(1.0, phi);
    for (std::size_t i = 0; i < f.data().size(); ++i) {
        EXPECT_LT(std::abs(out.data()[i] - f.data()[i] * phase), 1e-13);
    }
}

TEST(ApplyMask, MaskThenNegationIsIdentityAndPowerExact) {
    const GridSpec g = small_grid();
    const OpticalField f = smooth_field(g, 5);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, kTwoPi);
    PhaseTable mask(g.size());
    PhaseTable negated(g.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = uni(rng);
        negated[i] = -mask[i];
    }
    const OpticalField once = apply_mask(f, mask);
    EXPECT_NEAR(once.power() / f.power(), 1.0, 1e-14);
    const OpticalField back = apply_mask(once, negated);
    double max_abs = 0.0;
    for (const auto &v : f.data()) max_abs = std::max(max_abs, std::abs(v));
    for (std::size_t i = 0; i < f.data().size(); ++i) {
        EXPECT_LT(std::abs(back.data()[i] - f.data()[i]), 1e-14 * max_abs);
    }
}

TEST(ApplyMask, ShapeMismatch) {
    const GridSpec g = small_grid();
    const OpticalField f(g);
    EXPECT_EQ(kind_of([&] { apply_mask(f, PhaseTable(10, 0.0)); }), ErrorKind::GeometryError);
}

TEST(PhaseMaskStack, WrapsAndValidates) {
    const GridSpec g{8, 8, 8e-6, 810e-9};
    PhaseMaskStack stack(g, {PhaseTable(64, -0.5), PhaseTable(64, 7.0)}, 1e-3);
    EXPECT_EQ(stack.planes(), 2);
    for (double v : stack.mask(0)) EXPECT_NEAR(v, kTwoPi - 0.5, 1e-15);
    for (double v : stack.mask(1)) EXPECT_NEAR(v, 7.0 - kTwoPi, 1e-15);
    for (const auto &m : stack.masks()) {
        for (double v : m) {
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, kTwoPi);
        }
    }
    EXPECT_EQ(kind_of([&] { PhaseMaskStack(g, {}, 1e-3); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of([&] { PhaseMaskStack(g, {PhaseTable(63, 0.0)}, 1e-3); }), ErrorKind::GeometryError);
    EXPECT_EQ(kind_of([&] { PhaseMaskStack::zeros(g, 0, 1e-3); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(wrap_phase(kTwoPi), 0.0);
    EXPECT_EQ(wrap_phase(-0.0), 0.0);
}

TEST(ForwardPass, ZeroMasksArePureFreeSpace) {
    const GridSpec g{96, 96, 8e-6, 810e-9};
    const OpticalField f = gaussian(g, 0.0, 0.0, 70e-6, 0.0);
    const PhaseMaskStack stack = PhaseMaskStack::zeros(g, 3, 0.8e-3);
    const OpticalField out = forward_pass(stack, f);
    const OpticalField free = propagate(f, 4 * 0.8e-3);
    EXPECT_LT(relative_difference(out, free), 1e-8);
    EXPECT_NEAR(out.power() / f.power(), 1.0, 1e-8);
}

TEST(ForwardPass, SinglePlaneIsScreenThenTwoSteps) {
    const GridSpec g{96, 96, 8e-6, 810e-9};
    const OpticalField f = gaussian(g, 10e-6, 0.0, 70e-6, 0.0);
    PhaseTable lens(g.size());
    for (int ix = 0; ix < g.nx; ++ix) {
        for (int iy = 0; iy < g.ny; ++iy) {
            lens[static_cast<std::size_t>(ix) * g.ny + iy] = -1e7 * (g.x(ix) * g.x(ix) + g.y(iy) * g.y(iy));
        }
    }
    const PhaseMaskStack stack(g, {lens}, 1e-3);
    const OpticalField out = forward_pass(stack, f);
    const OpticalField ref = propagate(propagate(apply_mask(f, lens), 1e-3), 1e-3);
    EXPECT_LT(relative_difference(out, ref), 1e-12);
}

TEST(Apertures, SingleCenteredDisk) {
    const GridSpec g{64, 64, 10e-6, 810e-9};
    const auto modes = make_aperture_modes(ApertureLayout{1, 100e-6, 300e-6, Arrangement::Square}, g);
    ASSERT_EQ(modes.size(), 1u);
    EXPECT_NEAR(modes[0].power(), 1.0, 1e-12);
    EXPECT_NE(modes[0](32, 32), Complex(0.0));
    EXPECT_EQ(modes[0](0, 0), Complex(0.0));
}

TEST(Apertures, TwentyFiveOrthogonalDisks) {
    const GridSpec g{192, 192, 10e-6, 810e-9};
    const ApertureLayout layout{25, 100e-6, 300e-6, Arrangement::Square};
    const auto modes = make_aperture_modes(layout, g);
    ASSERT_EQ(modes.size(), 25u);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        for (std::size_t j = 0; j < modes.size(); ++j) {
            const double expected = i == j ? 1.0 : 0.0;
            EXPECT_LT(std::abs(inner_product(modes[i], modes[j]) - expected), 1e-12);
        }
    }
    // Aperture (k - 1) * 5 + l sits at row k (x) and column l (y).
    const auto centers = aperture_centers(layout);
    EXPECT_NEAR(centers[0].x, -600e-6, 1e-15);
    EXPECT_NEAR(centers[0].y, -600e-6, 1e-15);
    EXPECT_NEAR(centers[1].x, -600e-6, 1e-15);
    EXPECT_NEAR(centers[1].y, -300e-6, 1e-15);
    EXPECT_NEAR(centers[5].x, -300e-6, 1e-15);
}

TEST(Apertures, LineArrangement) {
    const ApertureLayout layout{5, 50e-6, 150e-6, Arrangement::Line};
    const auto centers = aperture_centers(layout);
    ASSERT_EQ(centers.size(), 5u);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        EXPECT_EQ(centers[i].x, 0.0);
        EXPECT_NEAR(centers[i].y, (static_cast<double>(i) - 2.0) * 150e-6, 1e-15);
    }
}

TEST(Apertures, GeometryErrors) {
    const GridSpec g{64, 64, 10e-6, 810e-9};
    EXPECT_EQ(kind_of([&] { make_aperture_modes({4, 100e-6, 150e-6, Arrangement::Square}, g); }),
              ErrorKind::GeometryError);
    // 5x5 at 300 um spacing does not fit on a 640 um wide grid.
    EXPECT_EQ(kind_of([&] { make_aperture_modes({25, 100e-6, 300e-6, Arrangement::Square}, g); }),
              ErrorKind::GeometryError);
    EXPECT_EQ(kind_of([&] { make_aperture_modes({5, 100e-6, 300e-6, Arrangement::Square}, g); }),
              ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of([&] { disk_mode(g, Point{0.0, 0.0}, 1e-9); }), ErrorKind::GeometryError);
}

TEST(InnerProduct, GridMismatch) {
    const OpticalField a(GridSpec{8, 8, 1e-6, 810e-9});
    const OpticalField b(GridSpec{8, 16, 1e-6, 810e-9});
    EXPECT_EQ(kind_of([&] { inner_product(a, b); }), ErrorKind::GeometryError);
}
