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

#include "hdqkd/wavefront_matching.hpp"

#include <cmath>
#include <sstream>

#include "hdqkd/error.hpp"
#include "parallel.hpp"

namespace hdqkd::optics {

namespace {

void require_matching_grids(std::span<const OpticalField> modes, const GridSpec &grid,
                            const char *what) {
    for (const OpticalField &m : modes) {
        if (!(m.grid() == grid)) {
            throw Error(ErrorKind::GeometryError, std::string(what) + ": grid mismatch");
        }
    }
}

OpticalField apply_conjugate_mask(const OpticalField &field, const PhaseTable &phase) {
    OpticalField out = field;
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= std::polar(1.0, -phase[i]);
    return out;
}

double mode_fidelity(const OpticalField &target, const OpticalField &input,
                     const OpticalField &output) {
    return std::norm(inner_product(target, output)) / (target.power() * input.power());
}

}  // namespace

void require_orthogonal(std::span<const OpticalField> modes, const char *what) {
    std::vector<double> powers;
    powers.reserve(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double p = modes[i].power();
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw Error(ErrorKind::InvalidModeSet,
                        std::string(what) + ": mode " + std::to_string(i + 1) + " carries no power");
        }
        powers.push_back(p);
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double overlap =
                std::abs(inner_product(modes[i], modes[j])) / std::sqrt(powers[i] * powers[j]);
            if (overlap > kOrthogonalityTolerance) {
                std::ostringstream msg;
                msg << what << ": modes " << j + 1 << " and " << i + 1 << " overlap by " << overlap;
                throw Error(ErrorKind::InvalidModeSet, msg.str());
            }
        }
    }
}

std::vector<OpticalField> mode_superpositions(std::span<const OpticalField> modes,
                                              const ComplexMatrix &amplitudes) {
    const auto d = static_cast<Eigen::Index>(modes.size());
    if (d == 0 || amplitudes.rows() != d) {
        throw Error(ErrorKind::InvalidInput, "amplitude matrix needs one row per mode");
    }
    const GridSpec grid = modes.front().grid();
    require_matching_grids(modes, grid, "mode_superpositions");
    std::vector<OpticalField> out;
    out.reserve(static_cast<std::size_t>(amplitudes.cols()));
    for (Eigen::Index k = 0; k < amplitudes.cols(); ++k) {
        OpticalField field(grid);
        auto dst = field.data();
        for (Eigen::Index n = 0; n < d; ++n) {
            const Complex c = amplitudes(n, k);
            if (c == Complex{}) continue;
            const auto src = modes[static_cast<std::size_t>(n)].data();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += c * src[i];
        }
        out.push_back(std::move(field));
    }
    return out;
}

PhaseMaskStack wavefront_match(std::span<const OpticalField> inputs,
                               std::span<const OpticalField> targets,
                               const WavefrontMatchingConfig &config) {
    if (config.planes < 1) throw Error(ErrorKind::InvalidConfig, "planes must be >= 1");
    if (config.iterations < 1) throw Error(ErrorKind::InvalidConfig, "iterations must be >= 1");
    if (inputs.empty() || inputs.size() != targets.size()) {
        throw Error(ErrorKind::InvalidModeSet, "need the same non-zero number of inputs and targets");
    }
    const GridSpec grid = inputs.front().grid();
    require_matching_grids(inputs, grid, "wavefront_match inputs");
    require_matching_grids(targets, grid, "wavefront_match targets");
    require_orthogonal(inputs, "wavefront_match inputs");
    require_orthogonal(targets, "wavefront_match targets");

    const std::size_t modes = inputs.size();
    const std::size_t planes = static_cast<std::size_t>(config.planes);
    const std::size_t pixels = grid.size();
    PhaseMaskStack stack = PhaseMaskStack::zeros(grid, config.planes, config.plane_spacing);
    const Propagator forward(grid, config.plane_spacing, config.propagation);
    const Propagator backward(grid, -config.plane_spacing, config.propagation);

    // backward_fields[p][m]: target m carried back to just after mask p.
    std::vector<std::vector<OpticalField>> backward_fields(planes, std::vector<OpticalField>(modes));
    std::vector<OpticalField> forward_fields(modes);
    std::vector<double> fidelities(modes);

    for (int iteration = 1; iteration <= config.iterations; ++iteration) {
        detail::parallel_for(modes, config.threads, [&](std::size_t m) {
            OpticalField field = backward(backward(targets[m]));
            backward_fields[planes - 1][m] = field;
            for (std::size_t p = planes - 1; p-- > 0;) {
                field = backward(apply_conjugate_mask(field, stack.mask(static_cast<int>(p + 1))));
                backward_fields[p][m] = field;
            }
        });

        for (std::size_t m = 0; m < modes; ++m) forward_fields[m] = inputs[m];
        for (std::size_t p = 0; p < planes; ++p) {
            std::vector<Complex> accum(pixels);
            for (std::size_t m = 0; m < modes; ++m) {
                const auto f = forward_fields[m].data();
                const auto b = backward_fields[p][m].data();
                for (std::size_t i = 0; i < pixels; ++i) accum[i] += f[i] * std::conj(b[i]);
            }
            PhaseTable mask(pixels);
            for (std::size_t i = 0; i < pixels; ++i) mask[i] = -std::arg(accum[i]);
            stack.set_mask(static_cast<int>(p), std::move(mask));
            detail::parallel_for(modes, config.threads, [&](std::size_t m) {
                forward_fields[m] = forward(apply_mask(forward_fields[m], stack.mask(static_cast<int>(p))));
            });
        }

        if (config.on_iteration) {
            detail::parallel_for(modes, config.threads, [&](std::size_t m) {
                fidelities[m] = mode_fidelity(targets[m], inputs[m], forward(forward_fields[m]));
            });
            double mean = 0.0;
            for (double f : fidelities) mean += f;
            config.on_iteration(iteration, mean / static_cast<double>(modes));
        }
    }
    return stack;
}

MatchingFidelity matching_fidelity(const PhaseMaskStack &stack, std::span<const OpticalField> inputs,
                                   std::span<const OpticalField> targets,
                                   const PropagationOptions &options) {
    if (inputs.size() != targets.size()) {
        throw Error(ErrorKind::InvalidModeSet, "need the same number of inputs and targets");
    }
    MatchingFidelity result;
    result.per_mode.resize(inputs.size());
    detail::parallel_for(inputs.size(), 0, [&](std::size_t m) {
        result.per_mode[m] = mode_fidelity(targets[m], inputs[m], forward_pass(stack, inputs[m], options));
    });
    for (double f : result.per_mode) result.mean += f;
    if (!inputs.empty()) result.mean /= static_cast<double>(inputs.size());
    return result;
}

ComplexMatrix transfer_matrix(const PhaseMaskStack &stack, std::span<const OpticalField> inputs,
                              std::span<const OpticalField> output_modes,
                              const PropagationOptions &options) {
    require_matching_grids(inputs, stack.grid(), "transfer_matrix inputs");
    require_matching_grids(output_modes, stack.grid(), "transfer_matrix outputs");
    require_orthogonal(output_modes, "transfer_matrix outputs");
    ComplexMatrix t(static_cast<Eigen::Index>(output_modes.size()),
                    static_cast<Eigen::Index>(inputs.size()));
    detail::parallel_for(inputs.size(), 0, [&](std::size_t j) {
        const OpticalField out = forward_pass(stack, inputs[j], options);
        for (std::size_t i = 0; i < output_modes.size(); ++i) {
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                inner_product(output_modes[i], out);
        }
    });
    return t;
}

SorterMetrics sorter_metrics(const ComplexMatrix &transfer, const ComplexMatrix &intended) {
    if (transfer.rows() != transfer.cols() || transfer.rows() == 0 ||
        intended.rows() != transfer.rows() || intended.cols() != transfer.cols()) {
        throw Error(ErrorKind::InvalidInput, "transfer and intended matrices must be square and equal size");
    }
    const double d = static_cast<double>(transfer.cols());
    const Eigen::VectorXd column_power = transfer.cwiseAbs2().colwise().sum().transpose();
    const double total = column_power.sum();
    if (!(total > 0.0)) throw Error(ErrorKind::DegenerateTransfer, "transfer matrix captures no power");

    SorterMetrics metrics;
    metrics.transfer = transfer;
    const ComplexMatrix aligned = intended.adjoint() * transfer;
    metrics.fidelity = std::norm(aligned.trace()) / (d * total);

    double crosstalk = 0.0;
    for (Eigen::Index j = 0; j < aligned.cols(); ++j) {
        const double column = aligned.col(j).squaredNorm();
        if (column > 0.0) crosstalk += (column - std::norm(aligned(j, j))) / column;
    }
    metrics.mean_crosstalk = crosstalk / d;
    metrics.insertion_loss_db = std::max(0.0, -10.0 * std::log10(total / d));
    return metrics;
}

}  // namespace hdqkd::optics
