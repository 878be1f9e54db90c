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
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hdqkd::mub {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// Max entry-wise deviation of B^dagger B from the identity that a Basis accepts.
inline constexpr double kUnitarityTolerance = 1e-12;
/// Max |overlap - 1/d| for two bases to count as mutually unbiased.
inline constexpr double kUnbiasedTolerance = 1e-10;

/// Max entry-wise |B^dagger B - I|.
double unitarity_deviation(const ComplexMatrix &amplitudes);

bool is_prime(int n);

/// Integer square root of d when d is a perfect square, otherwise 0.
int exact_sqrt(int d);

/// An orthonormal basis of C^d. Column j holds state j expressed in the
/// computational basis. Indices are 0-based here; files and the CLI use the
/// 1-based labels n, k = 1..d.
class Basis {
  public:
    /// Throws invalid-input unless `amplitudes` is square, non-empty and
    /// unitary within kUnitarityTolerance.
    Basis(ComplexMatrix amplitudes, std::string label);

    /// Skips the unitarity check. Only for loading data that is going to be
    /// inspected (e.g. `mub check` on a possibly corrupted file).
    static Basis unchecked(ComplexMatrix amplitudes, std::string label);

    int dim() const { return static_cast<int>(amplitudes_.rows()); }
    const ComplexMatrix &amplitudes() const { return amplitudes_; }
    const std::string &label() const { return label_; }

    /// Amplitude of state `state` on computational mode `mode`.
    Complex operator()(int mode, int state) const { return amplitudes_(mode, state); }

    /// Entry-wise complex conjugate (Bob's transposed-MUB convention).
    Basis conjugate() const;

  private:
    struct NoCheck {};
    Basis(ComplexMatrix amplitudes, std::string label, NoCheck);

    ComplexMatrix amplitudes_;
    std::string label_;
};

/// A set of pairwise mutually unbiased bases of equal dimension.
class MubSet {
  public:
    /// Throws invalid-input if dimensions differ or a pair fails the
    /// unbiasedness check at kUnbiasedTolerance.
    explicit MubSet(std::vector<Basis> bases);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(bases_.size()); }
    const std::vector<Basis> &bases() const { return bases_; }
    const Basis &operator[](int i) const { return bases_[static_cast<std::size_t>(i)]; }

  private:
    int dim_ = 0;
    std::vector<Basis> bases_;
};

/// Position of a computational mode on a sqrt(d) x sqrt(d) grid. `row` and
/// `col` are 1-based; `flat` = (row - 1) * side + col is 1-based as well.
struct GridIndex {
    int row = 1;
    int col = 1;

    static GridIndex from_flat(int flat, int side);
    int flat(int side) const { return (row - 1) * side + col; }
};

Basis computational_basis(int d);

/// (1/sqrt(d)) exp(2 pi i (k-1)(n-1) / d) at mode n, state k.
Basis dft_basis(int d);

/// Wootters-Fields basis r = 2..d+1 for prime d. r = 2 reproduces
/// dft_basis(d) bit for bit. For d = 2 the quadratic phase is i^{(r-2)(n-1)^2}.
Basis wh_basis(int d, int r);

/// Computational basis followed by wh_basis(d, r) for r = 2..d+1.
MubSet full_mub_set(int d);

/// Row-DFT (first) and column-DFT (second) bases on the sqrt(d) x sqrt(d)
/// mode grid. State (a, b) sits in column (a-1)*sqrt(d) + (b-1). Accepts any
/// perfect square d >= 4; the pair is verified to be unbiased before return.
std::pair<Basis, Basis> sqrt_mub_pair(int d);

/// Entry (i, j) = |<b1_i | b2_j>|^2.
RealMatrix overlap_table(const Basis &b1, const Basis &b2);

struct MubCheck {
    bool unbiased = false;
    double max_deviation = 0.0;
};

MubCheck check_mub_pair(const Basis &b1, const Basis &b2, double tol = kUnbiasedTolerance);

}  // namespace hdqkd::mub
