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
#include <span>
#include <string>
#include <vector>

#include "hdqkd/mub.hpp"

namespace hdqkd::protocol {

/// Normalization tolerance of each (k, l) block.
inline constexpr double kNormalizationTolerance = 1e-9;

/// Id of the sampling scheme stored alongside sampled data.
std::string generator_id();

/// Joint outcome probabilities p(a, b | k, l): Bob's outcome a, Alice's
/// outcome b, Alice's basis k, Bob's basis l. All indices are 0-based in
/// this API (CSV files use 1-based labels).
class ProbabilityTable {
  public:
    /// All-zero table; fill it through at() and call validate().
    ProbabilityTable(int dim, int alice_bases, int bob_bases);
    /// Throws invalid-input unless the values form a valid table.
    ProbabilityTable(int dim, int alice_bases, int bob_bases, std::vector<double> probs);

    int dim() const { return dim_; }
    int alice_bases() const { return alice_bases_; }
    int bob_bases() const { return bob_bases_; }

    double operator()(int a, int b, int k, int l) const { return probs_[index(a, b, k, l)]; }
    double &at(int a, int b, int k, int l) { return probs_[index(a, b, k, l)]; }

    /// p(a | b, k, l), i.e. Bob's outcome distribution for sent state b.
    double conditional(int a, int b, int k, int l) const;

    std::span<const double> values() const { return probs_; }

    /// Throws invalid-input on a negative entry or a (k, l) block whose sum
    /// differs from 1 by more than kNormalizationTolerance.
    void validate() const;

  private:
    std::size_t index(int a, int b, int k, int l) const {
        return ((static_cast<std::size_t>(k) * bob_bases_ + l) * dim_ + a) * dim_ + b;
    }

    int dim_;
    int alice_bases_;
    int bob_bases_;
    std::vector<double> probs_;
};

/// Coincidence counts c(a, b | k, l) with the acquisition metadata.
struct CountTable {
    int dim = 0;
    int alice_bases = 0;
    int bob_bases = 0;
    std::vector<std::uint64_t> counts;  // same layout as ProbabilityTable
    double integration_time = 0.0;     // seconds
    double coincidence_window = 0.0;   // seconds
    std::uint64_t seed = 0;
    std::string generator;

    CountTable() = default;
    CountTable(int dim, int alice_bases, int bob_bases);

    std::uint64_t operator()(int a, int b, int k, int l) const { return counts[index(a, b, k, l)]; }
    std::uint64_t &at(int a, int b, int k, int l) { return counts[index(a, b, k, l)]; }

  private:
    std::size_t index(int a, int b, int k, int l) const {
        return ((static_cast<std::size_t>(k) * bob_bases + l) * dim + a) * dim + b;
    }
};

enum class NoiseKind { Uniform, BlockBiased };

/// Which grid line an outcome's block follows: rows for the row-DFT basis,
/// columns for the column-DFT basis.
enum class BlockAlignment { Row, Column };

/// Error model applied to matched-basis settings. For the block-biased kind
/// each wrong outcome gets uniform_error()/(d-1) and each of the sqrt(d)-1
/// same-block wrong outcomes additionally gets block_error()/(sqrt(d)-1).
struct NoiseModel {
    NoiseKind kind = NoiseKind::Uniform;
    double total_error = 0.0;     // E_t
    double block_fraction = 0.0;  // E_b / E_t, block-biased only

    static NoiseModel uniform(double total_error);
    static NoiseModel block_biased(double uniform_error, double block_error);

    double uniform_error() const;  // E_u
    double block_error() const;    // E_b

    /// Throws invalid-noise on E_t outside [0, 1) or block_fraction outside [0, 1].
    void validate() const;
};

struct NoiseDecomposition {
    double total = 0.0;    // E_t
    double uniform = 0.0;  // E_u
    double block = 0.0;    // E_b
    /// Set when the estimate of E_b came out negative; `block` is then 0,
    /// `uniform` equals `total` and the raw estimate is kept below.
    bool block_clamped = false;
    double raw_block = 0.0;
};

/// Block id (0-based) of outcome `outcome` on the sqrt(d) grid.
int block_of(int outcome, int side, BlockAlignment alignment);

/// Probabilities for the maximally entangled state (1/sqrt(d)) sum_n |n>|n>:
/// p(a,b|k,l) = (1/d) |sum_n conj(A_k[n][b]) conj(B_l[n][a])|^2.
/// Pass entry-wise conjugated bases for Bob to get perfect matched-basis
/// correlations.
ProbabilityTable ideal_prob_table(std::span<const mub::Basis> alice_bases,
                                  std::span<const mub::Basis> bob_bases);

/// Redistributes Bob's outcome in every matched setting (k == k) through the
/// noise channel; mismatched settings are untouched. `alignments` gives the
/// block orientation per basis index (missing entries default to Row).
ProbabilityTable apply_noise(const ProbabilityTable &table, const NoiseModel &model,
                             std::span<const BlockAlignment> alignments = {});

struct SourceRates {
    double pair_rate = 0.0;           // detected pairs per second per setting
    double accidental_rate = 0.0;     // accidentals per second per setting
    double integration_time = 1.0;    // seconds
    double coincidence_window = 0.0;  // seconds, metadata only
};

/// Independent Poisson draws with mean
/// time * (pair_rate * p(a,b|k,l) + accidental_rate / d^2).
/// Cell i uses CounterRng(seed, i), so output depends only on the seed.
CountTable sample_counts(const ProbabilityTable &table, const SourceRates &rates, std::uint64_t seed);

/// Conditional frequencies per sent state times the uniform prior 1/d.
/// Throws insufficient-data naming the first (b, k, l) with no counts.
ProbabilityTable normalize_counts(const CountTable &counts);

/// Splits the error of matched setting `setting` into uniform and block
/// parts: E_t = 1 - sum_a p(a, a), E_u = mean out-of-block error times
/// (d - 1) / (d - sqrt(d)), E_b = E_t - E_u.
NoiseDecomposition decompose_errors(const ProbabilityTable &table, int setting,
                                    BlockAlignment alignment);

struct SessionRecord {
    int dim = 0;
    std::uint64_t seed = 0;
    std::string generator;
    std::vector<int> alice_basis;
    std::vector<int> bob_basis;
    std::vector<int> alice_symbol;
    std::vector<int> bob_symbol;
    std::vector<bool> sifted;
    long long sifted_rounds = 0;
    long long sifted_errors = 0;
    double observed_qber = 0.0;

    std::size_t rounds() const { return alice_basis.size(); }
};

/// Draws `rounds` protocol rounds from `table` (K == L required). Both
/// parties pick their basis independently from `basis_weights`; the outcome
/// pair comes from p(a, b | k, l). Round i uses CounterRng(seed, i).
SessionRecord simulate_session(const ProbabilityTable &table, std::span<const double> basis_weights,
                               long long rounds, std::uint64_t seed);

/// Convenience wrapper: Alice uses `bases`, Bob their conjugates, then noise
/// is applied before sampling rounds.
SessionRecord simulate_session(std::span<const mub::Basis> bases, std::span<const double> basis_weights,
                               long long rounds, const NoiseModel &noise,
                               std::span<const BlockAlignment> alignments, std::uint64_t seed);

}  // namespace hdqkd::protocol
