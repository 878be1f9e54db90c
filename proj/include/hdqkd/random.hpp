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
#include <limits>
#include <string_view>

namespace hdqkd {

/// Counter-based generator: output i of stream s under seed k is
/// splitmix64_mix(key(k, s) + (i + 1) * golden_gamma). Every (seed, stream)
/// pair is an independent, replayable sequence, so work can be partitioned by
/// stream without depending on thread count. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    static constexpr std::string_view kAlgorithm = "splitmix64-counter-v1";

    CounterRng(std::uint64_t seed, std::uint64_t stream) : state_(stream_key(seed, stream)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
        return mix(seed + mix(stream ^ 0xD1B54A32D192ED03ULL));
    }

    std::uint64_t state_;
};

}  // namespace hdqkd
