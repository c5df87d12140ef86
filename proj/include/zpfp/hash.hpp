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
#include <string>
#include <string_view>

namespace zpfp {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ull;

/// 64-bit FNV-1a over a byte range, optionally continuing a running hash.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : data) {
        h ^= static_cast<std::uint64_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

/// Folds a 64-bit value into a running FNV-1a hash as 8 little-endian bytes.
constexpr std::uint64_t fnv1a64_u64(std::uint64_t value, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffu;
        h *= kFnvPrime;
    }
    return h;
}

/// SplitMix64 finalizer; spreads structured inputs over the full 64-bit range.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a root seed, a subsystem label,
/// and up to two indices. Every random draw in the toolkit is keyed this way
/// so that results do not depend on call order.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = fnv1a64(label);
    h = fnv1a64_u64(root, h);
    h = fnv1a64_u64(a, h);
    h = fnv1a64_u64(b, h);
    return splitmix64(h);
}

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

}  // namespace zpfp
