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

#ifndef IPB_REFERENCE_HPP
#define IPB_REFERENCE_HPP

#include <vector>

#include "ipb/baseline.hpp"
#include "ipb/metrics.hpp"
#include "ipb/types.hpp"

// Plain single-threaded implementations of the hot kernels. They are the
// comparison point for the OpenMP versions: the parallel element-wise
// kernels must match them bit for bit, the parallel reductions to within
// accumulation-order noise. The benchmark target times both sides.
namespace ipb::reference {

std::vector<std::int64_t> edt_squared(const BinaryMask& mask);
BinaryMask dilate(const BinaryMask& mask, double radius);

std::vector<double> ssim_map(const Volume& gt, const Volume& pred, const MetricParams& params,
                             double dynamic_range);
double mse_masked(const Volume& gt, const Volume& pred, const BinaryMask& mask);

/// Serial conjugate-gradient Laplace infill with naive accumulation.
InpaintResult diffusion_inpaint(const Volume& voided, const BinaryMask& mask,
                                const SolverConfig& cfg);

}  // namespace ipb::reference

#endif  // IPB_REFERENCE_HPP
