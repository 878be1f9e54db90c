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
#include <cstddef>
#include <memory>

#include <fftw3.h>

#include "hdqkd/optics.hpp"

namespace hdqkd::optics {

struct FftwDeleter {
    void operator()(std::complex<double> *p) const { fftw_free(p); }
};

/// SIMD-aligned scratch buffer from fftw_malloc, matching the alignment the
/// cached plans were created with.
using FftBuffer = std::unique_ptr<std::complex<double>[], FftwDeleter>;

FftBuffer make_fft_buffer(std::size_t n);

/// In-place 2-D complex DFT pair of a fixed shape. Plans are built with
/// FFTW_ESTIMATE so repeated runs pick the same algorithm and give
/// bit-identical results. Execution is thread-safe; construction goes through
/// `get`, which serializes planning.
class FftPlan2d {
  public:
    static std::shared_ptr<const FftPlan2d> get(int n0, int n1);

    FftPlan2d(int n0, int n1);
    ~FftPlan2d();
    FftPlan2d(const FftPlan2d &) = delete;
    FftPlan2d &operator=(const FftPlan2d &) = delete;

    /// Unnormalized forward transform (exponent -1).
    void forward(std::complex<double> *data) const;
    /// Unnormalized inverse transform (exponent +1).
    void inverse(std::complex<double> *data) const;

  private:
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

}  // namespace hdqkd::optics
