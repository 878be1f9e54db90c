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

#include "hdqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hdqkd/error.hpp"
#include "hdqkd/random.hpp"

namespace hdqkd::protocol {

namespace {

void require_table_shape(int dim, int alice_bases, int bob_bases) {
    if (dim < 1) throw Error(ErrorKind::InvalidDimension, "dimension must be >= 1");
    if (alice_bases < 1 || bob_bases < 1) {
        throw Error(ErrorKind::InvalidInput, "tables need at least one basis per party");
    }
}

std::size_t table_size(int dim, int alice_bases, int bob_bases) {
    return static_cast<std::size_t>(dim) * dim * alice_bases * bob_bases;
}

// Cumulative weights for inverse-CDF sampling.
std::vector<double> cumulative(std::span<const double> weights) {
    std::vector<double> cdf(weights.size());
    double running = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        running += weights[i];
        cdf[i] = running;
    }
    return cdf;
}

int draw(const std::vector<double> &cdf, double u) {
    const double target = u * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.end()) {
        // Rounding put the target on the total; take the last index with mass.
        it = std::prev(cdf.end());
        while (it != cdf.begin() && *it == *std::prev(it)) --it;
    }
    return static_cast<int>(it - cdf.begin());
}

}  // namespace

std::string generator_id() {
    return std::string(CounterRng::kAlgorithm) + "+std::poisson_distribution+inverse-cdf";
}

ProbabilityTable::ProbabilityTable(int dim, int alice_bases, int bob_bases)
    : dim_(dim), alice_bases_(alice_bases), bob_bases_(bob_bases) {
    require_table_shape(dim, alice_bases, bob_bases);
    probs_.assign(table_size(dim, alice_bases, bob_bases), 0.0);
}

ProbabilityTable::ProbabilityTable(int dim, int alice_bases, int bob_bases, std::vector<double> probs)
    : dim_(dim), alice_bases_(alice_bases), bob_bases_(bob_bases), probs_(std::move(probs)) {
    require_table_shape(dim, alice_bases, bob_bases);
    if (probs_.size() != table_size(dim, alice_bases, bob_bases)) {
        throw Error(ErrorKind::InvalidInput, "probability table has the wrong number of entries");
    }
    validate();
}

double ProbabilityTable::conditional(int a, int b, int k, int l) const {
    double sent = 0.0;
    for (int x = 0; x < dim_; ++x) sent += (*this)(x, b, k, l);
    return sent > 0.0 ? (*this)(a, b, k, l) / sent : 0.0;
}

void ProbabilityTable::validate() const {
    for (int k = 0; k < alice_bases_; ++k) {
        for (int l = 0; l < bob_bases_; ++l) {
            double sum = 0.0;
            for (int a = 0; a < dim_; ++a) {
                for (int b = 0; b < dim_; ++b) {
                    const double p = (*this)(a, b, k, l);
                    if (!(p >= 0.0) || !std::isfinite(p)) {
                        throw Error(ErrorKind::InvalidInput, "probability table has a negative or non-finite entry");
                    }
                    sum += p;
                }
            }
            if (std::abs(sum - 1.0) > kNormalizationTolerance) {
                std::ostringstream msg;
                msg << "setting (k=" << k + 1 << ", l=" << l + 1 << ") sums to " << sum << ", not 1";
                throw Error(ErrorKind::InvalidInput, msg.str());
            }
        }
    }
}

CountTable::CountTable(int dim_, int alice_bases_, int bob_bases_)
    : dim(dim_), alice_bases(alice_bases_), bob_bases(bob_bases_) {
    require_table_shape(dim, alice_bases, bob_bases);
    counts.assign(table_size(dim, alice_bases, bob_bases), 0);
}

NoiseModel NoiseModel::uniform(double total_error) {
    NoiseModel m{NoiseKind::Uniform, total_error, 0.0};
    m.validate();
    return m;
}

NoiseModel NoiseModel::block_biased(double uniform_error, double block_error) {
    if (!(uniform_error >= 0.0) || !(block_error >= 0.0)) {
        throw Error(ErrorKind::InvalidNoise, "error rates must be non-negative");
    }
    const double total = uniform_error + block_error;
    NoiseModel m{NoiseKind::BlockBiased, total, total > 0.0 ? block_error / total : 0.0};
    m.validate();
    return m;
}

double NoiseModel::uniform_error() const {
    return kind == NoiseKind::Uniform ? total_error : total_error * (1.0 - block_fraction);
}

double NoiseModel::block_error() const {
    return kind == NoiseKind::Uniform ? 0.0 : total_error * block_fraction;
}

void NoiseModel::validate() const {
    if (!(total_error >= 0.0) || !(total_error < 1.0)) {
        throw Error(ErrorKind::InvalidNoise, "total error must lie in [0, 1)");
    }
    if (!(block_fraction >= 0.0) || !(block_fraction <= 1.0)) {
        throw Error(ErrorKind::InvalidNoise, "block fraction must lie in [0, 1]");
    }
}

int block_of(int outcome, int side, BlockAlignment alignment) {
    return alignment == BlockAlignment::Row ? outcome / side : outcome % side;
}

ProbabilityTable ideal_prob_table(std::span<const mub::Basis> alice_bases,
                                  std::span<const mub::Basis> bob_bases) {
    if (alice_bases.empty() || bob_bases.empty()) {
        throw Error(ErrorKind::InvalidInput, "need at least one basis per party");
    }
    const int d = alice_bases.front().dim();
    for (const auto &b : alice_bases) {
        if (b.dim() != d) throw Error(ErrorKind::InvalidInput, "Alice's bases differ in dimension");
    }
    for (const auto &b : bob_bases) {
        if (b.dim() != d) throw Error(ErrorKind::InvalidInput, "Bob's bases differ in dimension");
    }
    const int K = static_cast<int>(alice_bases.size());
    const int L = static_cast<int>(bob_bases.size());
    ProbabilityTable table(d, K, L);
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < L; ++l) {
            // amp(a, b) = sum_n conj(A[n][b]) conj(B[n][a]) = conj((B^T A)(a, b)).
            const mub::ComplexMatrix amp =
                bob_bases[static_cast<std::size_t>(l)].amplitudes().transpose() *
                alice_bases[static_cast<std::size_t>(k)].amplitudes();
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) table.at(a, b, k, l) = std::norm(amp(a, b)) / d;
            }
        }
    }
    table.validate();
    return table;
}

ProbabilityTable apply_noise(const ProbabilityTable &table, const NoiseModel &model,
                             std::span<const BlockAlignment> alignments) {
    model.validate();
    table.validate();
    const int d = table.dim();
    const double e_t = model.total_error;
    const double e_u = model.uniform_error();
    const double e_b = model.block_error();
    int side = 0;
    if (model.kind == NoiseKind::BlockBiased) {
        side = mub::exact_sqrt(d);
        if (side < 2) {
            throw Error(ErrorKind::InvalidDimension,
                        "block-biased noise needs a perfect square d >= 4, got " + std::to_string(d));
        }
    }
    if (e_t == 0.0) return table;
    if (d == 1) throw Error(ErrorKind::InvalidNoise, "a one-dimensional system cannot carry errors");

    // channel(to, from): probability that Bob's outcome `from` is reported as
    // `to`. The block term depends on the setting's alignment and is added below.
    Eigen::MatrixXd channel = Eigen::MatrixXd::Constant(d, d, e_u / (d - 1));
    channel.diagonal().setConstant(1.0 - e_t);

    ProbabilityTable out = table;
    const int matched = std::min(table.alice_bases(), table.bob_bases());
    for (int k = 0; k < matched; ++k) {
        Eigen::MatrixXd ch = channel;
        if (side > 0) {
            const BlockAlignment align = static_cast<std::size_t>(k) < alignments.size()
                                             ? alignments[static_cast<std::size_t>(k)]
                                             : BlockAlignment::Row;
            for (int from = 0; from < d; ++from) {
                for (int to = 0; to < d; ++to) {
                    if (to != from && block_of(to, side, align) == block_of(from, side, align)) {
                        ch(to, from) += e_b / (side - 1);
                    }
                }
            }
        }
        for (int b = 0; b < d; ++b) {
            for (int to = 0; to < d; ++to) {
                double p = 0.0;
                for (int from = 0; from < d; ++from) p += ch(to, from) * table(from, b, k, k);
                out.at(to, b, k, k) = p;
            }
        }
    }
    return out;
}

CountTable sample_counts(const ProbabilityTable &table, const SourceRates &rates, std::uint64_t seed) {
    table.validate();
    if (!(rates.pair_rate >= 0.0) || !(rates.accidental_rate >= 0.0)) {
        throw Error(ErrorKind::InvalidInput, "rates must be non-negative");
    }
    if (!(rates.integration_time > 0.0)) throw Error(ErrorKind::InvalidInput, "integration time must be positive");
    if (!(rates.coincidence_window >= 0.0)) {
        throw Error(ErrorKind::InvalidInput, "coincidence window must be non-negative");
    }
    const int d = table.dim();
    CountTable counts(d, table.alice_bases(), table.bob_bases());
    counts.integration_time = rates.integration_time;
    counts.coincidence_window = rates.coincidence_window;
    counts.seed = seed;
    counts.generator = generator_id();
    const double floor = rates.accidental_rate / (static_cast<double>(d) * d);
    const auto values = table.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double mean = rates.integration_time * (rates.pair_rate * values[i] + floor);
        if (mean <= 0.0) continue;
        CounterRng rng(seed, i);
        std::poisson_distribution<std::uint64_t> poisson(mean);
        counts.counts[i] = poisson(rng);
    }
    return counts;
}

ProbabilityTable normalize_counts(const CountTable &counts) {
    const int d = counts.dim;
    ProbabilityTable table(d, counts.alice_bases, counts.bob_bases);
    if (counts.counts.size() != table.values().size()) {
        throw Error(ErrorKind::InvalidInput, "count table has the wrong number of entries");
    }
    for (int k = 0; k < counts.alice_bases; ++k) {
        for (int l = 0; l < counts.bob_bases; ++l) {
            for (int b = 0; b < d; ++b) {
                std::uint64_t sent = 0;
                for (int a = 0; a < d; ++a) sent += counts(a, b, k, l);
                if (sent == 0) {
                    std::ostringstream msg;
                    msg << "no coincidences for sent state b=" << b + 1 << " in setting (k=" << k + 1
                        << ", l=" << l + 1 << ")";
                    throw Error(ErrorKind::InsufficientData, msg.str());
                }
                for (int a = 0; a < d; ++a) {
                    table.at(a, b, k, l) =
                        static_cast<double>(counts(a, b, k, l)) / static_cast<double>(sent) / d;
                }
            }
        }
    }
    table.validate();
    return table;
}

NoiseDecomposition decompose_errors(const ProbabilityTable &table, int setting,
                                    BlockAlignment alignment) {
    const int d = table.dim();
    const int side = mub::exact_sqrt(d);
    if (side < 2) {
        throw Error(ErrorKind::InvalidDimension,
                    "error decomposition needs a perfect square d >= 4, got " + std::to_string(d));
    }
    if (setting < 0 || setting >= std::min(table.alice_bases(), table.bob_bases())) {
        throw Error(ErrorKind::InvalidBasisIndex, "no matched setting " + std::to_string(setting + 1));
    }
    table.validate();
    const int k = setting;
    double correct = 0.0;
    double out_of_block = 0.0;
    for (int b = 0; b < d; ++b) {
        double sent = 0.0;
        for (int a = 0; a < d; ++a) sent += table(a, b, k, k);
        if (!(sent > 0.0)) {
            throw Error(ErrorKind::InsufficientData,
                        "sent state b=" + std::to_string(b + 1) + " has zero probability");
        }
        correct += table(b, b, k, k) / sent;
        for (int a = 0; a < d; ++a) {
            if (block_of(a, side, alignment) != block_of(b, side, alignment)) {
                out_of_block += table(a, b, k, k) / sent;
            }
        }
    }
    NoiseDecomposition result;
    result.total = 1.0 - correct / d;
    result.uniform = out_of_block / d * (d - 1.0) / (d - side);
    result.raw_block = result.total - result.uniform;
    result.block = result.raw_block;
    if (result.raw_block < 0.0) {
        result.block_clamped = result.raw_block < -1e-12;
        result.block = 0.0;
        result.uniform = result.total;
    }
    return result;
}

SessionRecord simulate_session(const ProbabilityTable &table, std::span<const double> basis_weights,
                               long long rounds, std::uint64_t seed) {
    if (basis_weights.empty()) throw Error(ErrorKind::InvalidConfig, "basis choice distribution is empty");
    if (rounds < 1) throw Error(ErrorKind::InvalidConfig, "a session needs at least one round");
    const int K = static_cast<int>(basis_weights.size());
    if (table.alice_bases() != K || table.bob_bases() != K) {
        throw Error(ErrorKind::InvalidConfig, "basis distribution does not match the table's bases");
    }
    double weight_sum = 0.0;
    for (double w : basis_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidConfig, "basis weights must be non-negative");
        weight_sum += w;
    }
    if (!(weight_sum > 0.0)) throw Error(ErrorKind::InvalidConfig, "basis weights sum to zero");
    table.validate();

    const int d = table.dim();
    const std::vector<double> basis_cdf = cumulative(basis_weights);
    std::vector<std::vector<double>> outcome_cdf;
    outcome_cdf.reserve(static_cast<std::size_t>(K) * K);
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < K; ++l) {
            std::vector<double> w(static_cast<std::size_t>(d) * d);
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) w[static_cast<std::size_t>(a) * d + b] = table(a, b, k, l);
            }
            outcome_cdf.push_back(cumulative(w));
        }
    }

    SessionRecord record;
    record.dim = d;
    record.seed = seed;
    record.generator = generator_id();
    const auto n = static_cast<std::size_t>(rounds);
    record.alice_basis.resize(n);
    record.bob_basis.resize(n);
    record.alice_symbol.resize(n);
    record.bob_symbol.resize(n);
    record.sifted.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(seed, i);
        const int k = draw(basis_cdf, rng.uniform());
        const int l = draw(basis_cdf, rng.uniform());
        const int outcome = draw(outcome_cdf[static_cast<std::size_t>(k) * K + l], rng.uniform());
        const int a = outcome / d;
        const int b = outcome % d;
        record.alice_basis[i] = k;
        record.bob_basis[i] = l;
        record.alice_symbol[i] = b;
        record.bob_symbol[i] = a;
        record.sifted[i] = k == l;
        if (k == l) {
            ++record.sifted_rounds;
            if (a != b) ++record.sifted_errors;
        }
    }
    record.observed_qber = record.sifted_rounds > 0 ? static_cast<double>(record.sifted_errors) /
                                                          static_cast<double>(record.sifted_rounds)
                                                    : 0.0;
    return record;
}

SessionRecord simulate_session(std::span<const mub::Basis> bases, std::span<const double> basis_weights,
                               long long rounds, const NoiseModel &noise,
                               std::span<const BlockAlignment> alignments, std::uint64_t seed) {
    if (bases.empty()) throw Error(ErrorKind::InvalidConfig, "basis set is empty");
    std::vector<mub::Basis> bob;
    bob.reserve(bases.size());
    for (const auto &b : bases) bob.push_back(b.conjugate());
    const ProbabilityTable noisy = apply_noise(ideal_prob_table(bases, bob), noise, alignments);
    return simulate_session(noisy, basis_weights, rounds, seed);
}

}  // namespace hdqkd::protocol
