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

#ifndef IPB_PARALLEL_HPP
#define IPB_PARALLEL_HPP

#include <cstdint>
#include <vector>

namespace ipb {

// Floating-point reductions are accumulated per fixed-size chunk and the
// chunk partials combined serially. The chunk grid does not depend on the
// thread count, so results are bit-identical for any OMP_NUM_THREADS.
inline constexpr std::int64_t kReductionChunk = 1 << 14;

/// f(begin, end) -> double partial sum over [begin, end).
template <class F>
double chunked_sum(std::int64_t n, F&& f) {
    if (n <= 0) return 0.0;
    const std::int64_t nchunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(static_cast<std::size_t>(nchunks));
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < nchunks; ++c) {
        const std::int64_t begin = c * kReductionChunk;
        const std::int64_t end = begin + kReductionChunk < n ? begin + kReductionChunk : n;
        partial[static_cast<std::size_t>(c)] = f(begin, end);
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

/// Integer count reduction; order-independent, kept chunked for symmetry.
template <class F>
std::int64_t chunked_count(std::int64_t n, F&& f) {
    std::int64_t total = 0;
#pragma omp parallel for schedule(static) reduction(+ : total)
    for (std::int64_t c = 0; c < (n + kReductionChunk - 1) / kReductionChunk; ++c) {
        const std::int64_t begin = c * kReductionChunk;
        const std::int64_t end = begin + kReductionChunk < n ? begin + kReductionChunk : n;
        total += f(begin, end);
    }
    return total;
}

}  // namespace ipb

#endif  // IPB_PARALLEL_HPP
