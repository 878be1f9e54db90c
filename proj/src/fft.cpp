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

#include "fft.hpp"

#include <map>
#include <mutex>
#include <new>
#include <utility>

namespace hdqkd::optics {

namespace {

std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex *as_fftw(std::complex<double> *p) { return reinterpret_cast<fftw_complex *>(p); }

}  // namespace

FftBuffer make_fft_buffer(std::size_t n) {
    auto *raw = reinterpret_cast<std::complex<double> *>(fftw_alloc_complex(n));
    if (raw == nullptr) throw std::bad_alloc();
    return FftBuffer(raw);
}

std::shared_ptr<const FftPlan2d> FftPlan2d::get(int n0, int n1) {
    static std::map<std::pair<int, int>, std::shared_ptr<const FftPlan2d>> cache;
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto &slot = cache[{n0, n1}];
    if (!slot) slot = std::make_shared<FftPlan2d>(n0, n1);
    return slot;
}

// Called with planner_mutex held (from get).
FftPlan2d::FftPlan2d(int n0, int n1) {
    FftBuffer scratch = make_fft_buffer(static_cast<std::size_t>(n0) * static_cast<std::size_t>(n1));
    forward_ = fftw_plan_dft_2d(n0, n1, as_fftw(scratch.get()), as_fftw(scratch.get()),
                                FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_2d(n0, n1, as_fftw(scratch.get()), as_fftw(scratch.get()),
                                FFTW_BACKWARD, FFTW_ESTIMATE);
}

FftPlan2d::~FftPlan2d() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
}

void FftPlan2d::forward(std::complex<double> *data) const {
    fftw_execute_dft(forward_, as_fftw(data), as_fftw(data));
}

void FftPlan2d::inverse(std::complex<double> *data) const {
    fftw_execute_dft(inverse_, as_fftw(data), as_fftw(data));
}

}  // namespace hdqkd::optics
