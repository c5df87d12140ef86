// Copyright 2026 the zpfp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace zpfp {

/// Seeded random stream with hand-rolled distributions.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the
/// standard. The std::*_distribution adapters are not pinned, so uniform and
/// normal draws are implemented here to keep seeded runs bit-identical across
/// standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound); bound must be >= 1. Unbiased via
    /// rejection of the partial top interval.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal deviate (Box-Muller; the spare variate is cached).
    double normal();

    /// Draws k distinct indices from [0, n) without replacement, in draw
    /// order (partial Fisher-Yates). Requires k <= n.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace zpfp
