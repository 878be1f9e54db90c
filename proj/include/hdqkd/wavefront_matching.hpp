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

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hdqkd/optics.hpp"

namespace hdqkd::optics {

using ComplexMatrix = Eigen::MatrixXcd;

/// Modes whose normalized cross overlap exceeds this are rejected.
inline constexpr double kOrthogonalityTolerance = 1e-6;

struct WavefrontMatchingConfig {
    int planes = 10;
    double plane_spacing = 43.5e-3;
    int iterations = 30;
    PropagationOptions propagation{};
    /// Worker threads for the per-mode passes; 0 picks hardware concurrency.
    /// Results do not depend on this value.
    int threads = 0;
    /// Called after every sweep with the 1-based iteration number and the
    /// current mean fidelity.
    std::function<void(int, double)> on_iteration;
};

/// Field k = sum_n amplitudes(n, k) * modes[n]; turns a basis expressed in
/// computational modes into fields. Throws invalid-input on a size mismatch.
std::vector<OpticalField> mode_superpositions(std::span<const OpticalField> modes,
                                              const ComplexMatrix &amplitudes);

/// Per-mode |<target_m | forward_pass(stack, input_m)>|^2 and their mean.
struct MatchingFidelity {
    std::vector<double> per_mode;
    double mean = 0.0;
};

/// Throws invalid-mode-set when two modes overlap beyond
/// kOrthogonalityTolerance (normalized) or a mode carries no power.
void require_orthogonal(std::span<const OpticalField> modes, const char *what);

/// Designs a stack that maps input m onto target m at the detection plane.
///
/// Each iteration sweeps planes 1..P. At plane p the inputs are propagated
/// through the already-updated masks 1..p-1 and the targets are
/// back-propagated through masks P..p+1 of the previous sweep; the mask is
/// replaced by -arg(sum_m forward_m * conj(backward_m)). The targets live at
/// the detection plane of forward_pass. Deterministic: no randomness, and the
/// per-plane reduction over modes runs serially in mode order.
PhaseMaskStack wavefront_match(std::span<const OpticalField> inputs,
                               std::span<const OpticalField> targets,
                               const WavefrontMatchingConfig &config);

MatchingFidelity matching_fidelity(const PhaseMaskStack &stack, std::span<const OpticalField> inputs,
                                   std::span<const OpticalField> targets,
                                   const PropagationOptions &options = {});

/// Entry (i, j) = <output_i | forward_pass(stack, input_j)>.
ComplexMatrix transfer_matrix(const PhaseMaskStack &stack, std::span<const OpticalField> inputs,
                              std::span<const OpticalField> output_modes,
                              const PropagationOptions &options = {});

struct SorterMetrics {
    ComplexMatrix transfer;
    double fidelity = 0.0;
    double mean_crosstalk = 0.0;
    double insertion_loss_db = 0.0;
};

/// Scores a transfer matrix against the intended unitary:
/// fidelity = |tr(U^H T)|^2 / (d * sum of column powers), crosstalk is the
/// mean off-diagonal share of each column of U^H T, loss is
/// -10 log10(mean column power). Throws degenerate-transfer when no power is
/// captured.
SorterMetrics sorter_metrics(const ComplexMatrix &transfer, const ComplexMatrix &intended);

}  // namespace hdqkd::optics
