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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdqkd/protocol.hpp"

namespace hdqkd::keyrate {

enum class Bound {
    /// log2(d) - h_d((d+1)E/d) - ((d+1)/d) E log2(d+1), E the mean error over all d+1 bases.
    DepolarizingAllMubs,
    /// log2(d) - 2 h_d(E).
    TwoMubUniform,
    /// log2(d) - 2 h_d(E_u, E_b) with the block-biased entropy.
    TwoMubBlock,
};

std::string_view to_string(Bound bound);
/// Accepts "depolarizing", "two-mub-uniform", "two-mub-block" and the
/// snake_case ids.
Bound bound_from_string(std::string_view text);

/// Fraction of the total error that is block error along a threshold or
/// curve sweep.
struct SplitProfile {
    double block_fraction = 0.0;

    static SplitProfile uniform() { return {0.0}; }
    /// Split measured in the 25-dimensional experiment (E_b ~ 0.77 E_t).
    static SplitProfile experiment() { return {0.77}; }
    static SplitProfile all_block() { return {1.0}; }
};

/// h_d(x) = -x log2(x/(d-1)) - (1-x) log2(1-x), with 0 log 0 = 0.
/// Throws domain-error unless 0 <= x < 1 and d >= 2.
double shannon_hd(double x, int d);

/// Entropy of the outcome distribution with one correct outcome (1 - E_t),
/// d - sqrt(d) out-of-block outcomes (E_u/(d-1) each) and sqrt(d) - 1
/// in-block outcomes (E_b/(sqrt(d)-1) + E_u/(d-1) each).
double entropy_block_biased(int d, double uniform_error, double block_error);

/// Rate of `bound` at total error E with the given split. The profile is
/// ignored by the depolarizing and uniform bounds.
double rate_at(Bound bound, int d, double total_error, SplitProfile profile = {});

struct ThresholdResult {
    double value = 0.0;
    /// False if the rate increased somewhere between 0 and the root.
    bool monotone = true;
    /// True when the rate touches zero without changing sign.
    bool tangent = false;
};

/// Smallest E in (0, 1) where the rate reaches zero along the profile.
/// Bracket [1e-12, 1 - 1e-6] (clipped to the bound's domain), scanned for the
/// first sign change and refined by bisection until |rate| < 1e-9 (at most
/// 200 steps). Throws no-threshold if the rate never reaches zero.
ThresholdResult threshold(Bound bound, int d, SplitProfile profile = {});

struct KeyRateReport {
    Bound bound = Bound::TwoMubUniform;
    int d = 0;
    double total_error = 0.0;  // E (depolarizing) or E_t = E_u + E_b
    double uniform_error = 0.0;
    double block_error = 0.0;
    double rate = 0.0;  // bits per sifted photon
    /// Threshold of the same bound along the same block fraction.
    ThresholdResult threshold;
    double margin = 0.0;  // threshold - total_error
};

KeyRateReport rate_depolarizing(int d, double mean_error);

/// log2(d) - 2 h_d(E_u, E_b); with E_b == 0 this is the uniform bound for any
/// d >= 2, otherwise d must be a perfect square.
KeyRateReport rate_two_mub(int d, double uniform_error, double block_error);

struct CurvePoint {
    double total_error = 0.0;
    double uniform_error = 0.0;
    double block_error = 0.0;
    double rate = 0.0;
};

std::vector<CurvePoint> rate_curve(Bound bound, int d, std::span<const double> errors,
                                   SplitProfile profile = {});

/// Error statistics of a probability table at five levels of detail. Index
/// layout follows ProbabilityTable (0-based k, l, a, b).
struct SubsetStats {
    int dim = 0;
    int bases = 0;
    double mean_error = 0.0;              // E
    std::vector<double> basis_error;      // E_k
    std::vector<double> setting_error;    // E_{k,l}, index k * K + l
    std::vector<double> matched_probs;    // E^{a,b}_k, index (k * d + a) * d + b
    std::vector<double> all_probs;        // E^{a,b}_{k,l}, table layout

    double setting(int k, int l) const { return setting_error[static_cast<std::size_t>(k) * bases + l]; }
};

/// Throws invalid-input on an unnormalized table or K != L.
SubsetStats subset_stats(const protocol::ProbabilityTable &table);

}  // namespace hdqkd::keyrate
