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

#include "hdqkd/mub.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hdqkd/error.hpp"

namespace hdqkd::mub {

namespace {

// exp(2 pi i * residue / modulus) with the residue already reduced, so equal
// residues give bit-identical amplitudes.
Complex root_of_unity(long long residue, long long modulus, double scale) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(residue) /
                         static_cast<double>(modulus);
    return std::polar(scale, angle);
}

void require_positive(int d) {
    if (d < 1) {
        throw Error(ErrorKind::InvalidDimension,
                    "dimension must be >= 1, got " + std::to_string(d));
    }
}

void require_prime(int d) {
    if (!is_prime(d)) {
        throw Error(ErrorKind::InvalidDimension,
                    "dimension must be prime, got " + std::to_string(d));
    }
}

void require_same_dim(const Basis &b1, const Basis &b2) {
    if (b1.dim() != b2.dim()) {
        throw Error(ErrorKind::InvalidInput, "basis dimensions differ: " +
                                                 std::to_string(b1.dim()) + " vs " +
                                                 std::to_string(b2.dim()));
    }
}

}  // namespace

double unitarity_deviation(const ComplexMatrix &amplitudes) {
    const ComplexMatrix gram = amplitudes.adjoint() * amplitudes;
    const ComplexMatrix identity = ComplexMatrix::Identity(gram.rows(), gram.cols());
    return (gram - identity).cwiseAbs().maxCoeff();
}

bool is_prime(int n) {
    if (n < 2) return false;
    for (int f = 2; f * f <= n; ++f) {
        if (n % f == 0) return false;
    }
    return true;
}

int exact_sqrt(int d) {
    if (d < 0) return 0;
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
    while (s * s > d) --s;
    while ((s + 1) * (s + 1) <= d) ++s;
    return s * s == d ? s : 0;
}

Basis::Basis(ComplexMatrix amplitudes, std::string label)
    : amplitudes_(std::move(amplitudes)), label_(std::move(label)) {
    if (amplitudes_.rows() == 0 || amplitudes_.rows() != amplitudes_.cols()) {
        throw Error(ErrorKind::InvalidInput, "basis amplitudes must be a non-empty square table");
    }
    const double dev = unitarity_deviation(amplitudes_);
    if (!(dev <= kUnitarityTolerance)) {
        std::ostringstream msg;
        msg << "basis '" << label_ << "' is not unitary (max |B^H B - I| = " << dev << ")";
        throw Error(ErrorKind::InvalidInput, msg.str());
    }
}

Basis::Basis(ComplexMatrix amplitudes, std::string label, NoCheck)
    : amplitudes_(std::move(amplitudes)), label_(std::move(label)) {
    if (amplitudes_.rows() == 0 || amplitudes_.rows() != amplitudes_.cols()) {
        throw Error(ErrorKind::InvalidInput, "basis amplitudes must be a non-empty square table");
    }
}

Basis Basis::unchecked(ComplexMatrix amplitudes, std::string label) {
    return Basis(std::move(amplitudes), std::move(label), NoCheck{});
}

Basis Basis::conjugate() const {
    return Basis(amplitudes_.conjugate(), label_ + "*", NoCheck{});
}

MubSet::MubSet(std::vector<Basis> bases) : bases_(std::move(bases)) {
    if (bases_.empty()) {
        throw Error(ErrorKind::InvalidInput, "a MUB set needs at least one basis");
    }
    dim_ = bases_.front().dim();
    for (std::size_t i = 0; i < bases_.size(); ++i) {
        require_same_dim(bases_.front(), bases_[i]);
        for (std::size_t j = 0; j < i; ++j) {
            const MubCheck check = check_mub_pair(bases_[j], bases_[i]);
            if (!check.unbiased) {
                std::ostringstream msg;
                msg << "bases '" << bases_[j].label() << "' and '" << bases_[i].label()
                    << "' are not mutually unbiased (max deviation " << check.max_deviation << ")";
                throw Error(ErrorKind::InvalidInput, msg.str());
            }
        }
    }
}

GridIndex GridIndex::from_flat(int flat, int side) {
    return GridIndex{(flat - 1) / side + 1, (flat - 1) % side + 1};
}

Basis computational_basis(int d) {
    require_positive(d);
    return Basis(ComplexMatrix::Identity(d, d), "computational");
}

Basis dft_basis(int d) {
    require_positive(d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    ComplexMatrix amps(d, d);
    for (int n = 0; n < d; ++n) {
        for (int k = 0; k < d; ++k) {
            const long long residue = (static_cast<long long>(k) * n) % d;
            amps(n, k) = root_of_unity(residue, d, scale);
        }
    }
    return Basis(std::move(amps), "DFT");
}

Basis wh_basis(int d, int r) {
    require_prime(d);
    if (r < 2 || r > d + 1) {
        throw Error(ErrorKind::InvalidBasisIndex, "basis index r must be in 2.." +
                                                      std::to_string(d + 1) + ", got " +
                                                      std::to_string(r));
    }
    const std::string label = "WH:r=" + std::to_string(r);
    if (r == 2) {
        Basis dft = dft_basis(d);
        return Basis(dft.amplitudes(), label);
    }
    // For d = 2 the quadratic term needs a fourth root of unity, so work
    // modulo 2d there and modulo d otherwise.
    const long long modulus = d == 2 ? 4 : d;
    const long long linear_factor = d == 2 ? 2 : 1;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    ComplexMatrix amps(d, d);
    for (long long n = 0; n < d; ++n) {
        for (long long k = 0; k < d; ++k) {
            const long long exponent = linear_factor * k * n + static_cast<long long>(r - 2) * n * n;
            amps(n, k) = root_of_unity(exponent % modulus, modulus, scale);
        }
    }
    return Basis(std::move(amps), label);
}

MubSet full_mub_set(int d) {
    require_prime(d);
    std::vector<Basis> bases;
    bases.reserve(static_cast<std::size_t>(d) + 1);
    bases.push_back(computational_basis(d));
    for (int r = 2; r <= d + 1; ++r) {
        bases.push_back(wh_basis(d, r));
    }
    return MubSet(std::move(bases));
}

std::pair<Basis, Basis> sqrt_mub_pair(int d) {
    const int side = exact_sqrt(d);
    if (d < 4 || side < 2) {
        throw Error(ErrorKind::InvalidDimension,
                    "square-root MUB pair needs a perfect square d >= 4, got " + std::to_string(d));
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(side));
    ComplexMatrix rows = ComplexMatrix::Zero(d, d);
    ComplexMatrix cols = ComplexMatrix::Zero(d, d);
    for (int a = 0; a < side; ++a) {
        for (int b = 0; b < side; ++b) {
            const int state = a * side + b;
            for (int m = 0; m < side; ++m) {
                // Row DFT: superpose the modes (a, m) of grid row a.
                rows(a * side + m, state) =
                    root_of_unity((static_cast<long long>(b) * m) % side, side, scale);
                // Column DFT: superpose the modes (m, b) of grid column b.
                cols(m * side + b, state) =
                    root_of_unity((static_cast<long long>(a) * m) % side, side, scale);
            }
        }
    }
    Basis mub1(std::move(rows), "row-DFT");
    Basis mub2(std::move(cols), "column-DFT");
    const MubCheck check = check_mub_pair(mub1, mub2);
    if (!check.unbiased) {
        std::ostringstream msg;
        msg << "row/column DFT pair at d=" << d << " failed the unbiasedness check (max deviation "
            << check.max_deviation << ")";
        throw Error(ErrorKind::InvalidDimension, msg.str());
    }
    return {std::move(mub1), std::move(mub2)};
}

RealMatrix overlap_table(const Basis &b1, const Basis &b2) {
    require_same_dim(b1, b2);
    const ComplexMatrix inner = b1.amplitudes().adjoint() * b2.amplitudes();
    return inner.cwiseAbs2();
}

MubCheck check_mub_pair(const Basis &b1, const Basis &b2, double tol) {
    const RealMatrix overlaps = overlap_table(b1, b2);
    const double flat = 1.0 / static_cast<double>(b1.dim());
    const double dev = (overlaps.array() - flat).abs().maxCoeff();
    return MubCheck{dev <= tol, dev};
}

}  // namespace hdqkd::mub
