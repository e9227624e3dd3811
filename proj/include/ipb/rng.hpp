// Copyright 2026 The inpaintbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IPB_RNG_HPP
#define IPB_RNG_HPP

#include <cstdint>
#include <string_view>

namespace ipb {

/// SplitMix64 counter generator. Chosen over std::mt19937 because the output
/// sequence is fixed by this header alone, independent of any standard
/// library implementation, which keeps pipeline outputs identical across
/// platforms. Per-case substreams are derived from (seed, case_id) so case
/// results do not depend on processing order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Substream for one case: master seed mixed with an FNV-1a hash of the id.
    static Rng for_case(std::uint64_t seed, std::string_view case_id) {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a offset basis
        for (char c : case_id) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 1099511628211ULL;  // FNV-1a prime
        }
        return Rng(seed ^ scramble(h));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return scramble(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Unbiased via 128-bit multiply rejection.
    std::uint64_t below(std::uint64_t n) {
        // Lemire's method.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = -n % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Fair coin.
    bool coin() { return (next_u64() >> 63) != 0; }

private:
    static std::uint64_t scramble(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace ipb

#endif  // IPB_RNG_HPP
