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

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "cli_common.hpp"
#include "hdqkd/mask_io.hpp"
#include "hdqkd/mub.hpp"
#include "hdqkd/optics.hpp"
#include "hdqkd/wavefront_matching.hpp"

namespace hdqkd::cli {
namespace fs = std::filesystem;
using namespace hdqkd::optics;

json optics_defaults() {
    return {{"grid", {{"nx", 128}, {"ny", 128}, {"pitch", 12.5e-6}, {"wavelength", 810e-9}}},
            {"apertures", {{"count", 5}, {"radius", 100e-6}, {"spacing", 300e-6}, {"arrangement", "line"}}},
            {"planes", 10},
            {"plane_spacing", 43.5e-3},
            {"iterations", 30},
            {"pad_factor", 2},
            {"threads", 0},
            {"transform", "dft"},
            {"output_modes", "propagated-inputs"},
            {"detector_radius", 50e-6},
            {"stack", nullptr},
            {"pgm", false}};
}

namespace {

GridSpec parse_grid(const json &section) {
    if (!section.contains("grid") || !section.at("grid").is_object()) config_error("optics.grid", "missing");
    const json &g = section.at("grid");
    GridSpec grid{get_int(g, "nx", "optics.grid"), get_int(g, "ny", "optics.grid"),
                  get_double(g, "pitch", "optics.grid"), get_double(g, "wavelength", "optics.grid")};
    grid.validate();
    return grid;
}

ApertureLayout parse_layout(const json &section) {
    if (!section.contains("apertures") || !section.at("apertures").is_object()) {
        config_error("optics.apertures", "missing");
    }
    const json &a = section.at("apertures");
    ApertureLayout layout;
    layout.count = get_int(a, "count", "optics.apertures");
    layout.radius = get_double(a, "radius", "optics.apertures");
    layout.spacing = get_double(a, "spacing", "optics.apertures");
    std::string arrangement = get_string(a, "arrangement", "optics.apertures");
    if (arrangement == "square") {
        layout.arrangement = Arrangement::Square;
    } else if (arrangement == "line") {
        layout.arrangement = Arrangement::Line;
    } else {
        config_error("optics.apertures.arrangement", "expected square or line, got '" + arrangement + "'");
    }
    if (layout.count < 2) config_error("optics.apertures.count", "need at least 2 apertures");
    layout.validate();
    return layout;
}

ComplexMatrix parse_transform(const std::string &name, int d) {
    if (name == "identity") return ComplexMatrix::Identity(d, d);
    if (name == "dft") return mub::dft_basis(d).amplitudes();
    if (name == "row-dft") return mub::sqrt_mub_pair(d).first.amplitudes();
    if (name == "column-dft") return mub::sqrt_mub_pair(d).second.amplitudes();
    if (name.rfind("wh:", 0) == 0) {
        int r = 0;
        try {
            r = std::stoi(name.substr(3));
        } catch (const std::logic_error &) {
            config_error("optics.transform", "cannot parse basis index in '" + name + "'");
        }
        return mub::wh_basis(d, r).amplitudes();
    }
    config_error("optics.transform",
                 "unknown transform '" + name + "' (expected identity, dft, row-dft, column-dft or wh:<r>)");
}

/// Symmetric (Loewdin) orthonormalization: the orthonormal set closest to
/// `modes`. Returns the largest normalized overlap found before the step.
double orthonormalize(std::vector<OpticalField> &modes) {
    const auto d = static_cast<Eigen::Index>(modes.size());
    ComplexMatrix gram(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) gram(i, j) = inner_product(modes[i], modes[j]);
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) continue;
            double norm = std::sqrt(std::abs(gram(i, i)) * std::abs(gram(j, j)));
            worst = std::max(worst, std::abs(gram(i, j)) / norm);
        }
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(gram);
    if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() <= 1e-12) {
        throw Error(ErrorKind::InvalidModeSet, "propagated output modes are linearly dependent; use "
                                               "output_modes \"apertures\" or a larger grid");
    }
    modes = mode_superpositions(modes, solver.operatorInverseSqrt());
    return worst;
}

json complex_matrix_json(const ComplexMatrix &m) {
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array();
        json ii = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rr.push_back(m(i, j).real());
            ii.push_back(m(i, j).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return {{"re", re}, {"im", im}};
}

void write_json(const fs::path &path, const json &doc) {
    std::ofstream file(path);
    if (!file) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    file << doc.dump(2) << '\n';
}

}  // namespace

int run_optics(const Context &ctx, const json &section, bool design) {
    GridSpec grid = parse_grid(section);
    ApertureLayout layout = parse_layout(section);
    const int d = layout.count;
    const std::string transform_name = get_string(section, "transform", "optics");
    const ComplexMatrix intended = parse_transform(transform_name, d);

    PropagationOptions propagation;
    propagation.pad_factor = get_int(section, "pad_factor", "optics");
    if (propagation.pad_factor < 1) config_error("optics.pad_factor", "must be at least 1");
    const int threads = get_int(section, "threads", "optics");
    if (threads < 0) config_error("optics.threads", "must be non-negative");

    // The stack decides grid, plane count and spacing when evaluating a file.
    std::optional<PhaseMaskStack> stack;
    if (!design) {
        std::string source = has_value(section, "stack") ? get_string(section, "stack", "optics")
                                                         : (ctx.out_dir / "stack.mplc").string();
        if (source != "zeros") {
            stack = read_mask_stack(fs::path(source));
            if (!(stack->grid() == grid)) {
                ctx.note("using the grid stored in " + source);
                grid = stack->grid();
            }
        }
    }
    const int planes = stack ? stack->planes() : get_int(section, "planes", "optics");
    const double plane_spacing = stack ? stack->plane_spacing() : get_double(section, "plane_spacing", "optics");
    if (planes < 1) config_error("optics.planes", "must be at least 1");
    if (!(plane_spacing > 0.0)) config_error("optics.plane_spacing", "must be positive");
    check_sampling(grid, plane_spacing, propagation);

    std::vector<OpticalField> inputs = make_aperture_modes(layout, grid);
    const PhaseMaskStack zero = PhaseMaskStack::zeros(grid, planes, plane_spacing);

    const std::string output_kind = get_string(section, "output_modes", "optics");
    std::vector<OpticalField> outputs;
    double raw_overlap = 0.0;
    if (output_kind == "propagated-inputs") {
        for (const auto &field : inputs) outputs.push_back(forward_pass(zero, field, propagation));
        raw_overlap = orthonormalize(outputs);
    } else if (output_kind == "apertures") {
        outputs = inputs;
    } else if (output_kind == "fibers") {
        double radius = get_double(section, "detector_radius", "optics");
        for (Point c : aperture_centers(layout)) outputs.push_back(disk_mode(grid, c, radius));
    } else {
        config_error("optics.output_modes", "expected propagated-inputs, apertures or fibers, got '" +
                                                output_kind + "'");
    }
    std::vector<OpticalField> targets = mode_superpositions(outputs, intended);

    json history = json::array();
    if (design) {
        WavefrontMatchingConfig config;
        config.planes = planes;
        config.plane_spacing = plane_spacing;
        config.iterations = get_int(section, "iterations", "optics");
        config.propagation = propagation;
        config.threads = threads;
        config.on_iteration = [&](int iteration, double fidelity) {
            history.push_back(fidelity);
            ctx.note("iteration " + std::to_string(iteration) + ": mean fidelity " + format_double(fidelity));
        };
        if (config.iterations < 1) config_error("optics.iterations", "must be at least 1");
        stack = wavefront_match(inputs, targets, config);
        write_mask_stack(ctx.out_dir / "stack.mplc", *stack);
        if (section.value("pgm", false)) {
            for (int p = 0; p < stack->planes(); ++p) {
                write_phase_pgm(ctx.out_dir / ("mask_" + std::to_string(p + 1) + ".pgm"), grid, stack->mask(p));
            }
        }
    }
    const PhaseMaskStack &evaluated = stack ? *stack : zero;

    const MatchingFidelity matching = matching_fidelity(evaluated, inputs, targets, propagation);
    const ComplexMatrix transfer = transfer_matrix(evaluated, inputs, outputs, propagation);
    const SorterMetrics metrics = sorter_metrics(transfer, intended);

    json report = {{"d", d},
                   {"transform", transform_name},
                   {"output_modes", output_kind},
                   {"planes", planes},
                   {"plane_spacing", plane_spacing},
                   {"fidelity", metrics.fidelity},
                   {"mean_crosstalk", metrics.mean_crosstalk},
                   {"insertion_loss_db", metrics.insertion_loss_db},
                   {"matching_fidelity", matching.mean},
                   {"matching_fidelity_per_mode", matching.per_mode},
                   {"transfer", complex_matrix_json(transfer)},
                   {"max_propagation_distance", max_propagation_distance(grid, propagation)}};
    if (output_kind == "propagated-inputs") report["output_mode_overlap_before_orthonormalization"] = raw_overlap;
    if (design) {
        report["history"] = history;
        report["zero_stack_matching_fidelity"] = matching_fidelity(zero, inputs, targets, propagation).mean;
    }
    // Measured device losses of the reference experiment, for comparison only.
    if (d == 5) report["annotations"] = {{"reported_device_loss_db", 10.7}};
    if (d == 25) report["annotations"] = {{"reported_device_loss_db", 13.4}};
    fs::path metrics_path = ctx.out_dir / (design ? "metrics.json" : "eval_metrics.json");
    write_json(metrics_path, report);

    ctx.note("fidelity " + format_double(metrics.fidelity) + ", crosstalk " +
             format_double(metrics.mean_crosstalk) + ", loss " + format_double(metrics.insertion_loss_db, 4) +
             " dB, matching fidelity " + format_double(matching.mean));
    if (design) ctx.note("wrote " + (ctx.out_dir / "stack.mplc").string());
    ctx.note("wrote " + metrics_path.string());
    return 0;
}

}  // namespace hdqkd::cli
