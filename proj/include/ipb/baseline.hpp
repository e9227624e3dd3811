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

#ifndef IPB_BASELINE_HPP
#define IPB_BASELINE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "ipb/types.hpp"

namespace ipb {

enum class SolverMethod { kConjugateGradient, kGaussSeidel };

const char* solver_method_name(SolverMethod m);

/// Diffusion infill solver knobs. `tolerance` bounds the max residual of the
/// discrete Laplace system, measured relative to the component's boundary
/// value range.
struct SolverConfig {
    double tolerance = 1e-6;
    int max_iterations = 10000;
    SolverMethod method = SolverMethod::kConjugateGradient;
};

struct InpaintStats {
    std::int64_t iterations = 0;    // summed over mask components
    double max_residual = 0.0;      // max over components, relative to boundary range
    double max_residual_abs = 0.0;  // same, in intensity units
    int components = 0;
    bool converged = true;
};

struct InpaintResult {
    Volume volume;
    InpaintStats stats;
};

/// Fills the masked region by solving the 6-neighbor discrete Laplace
/// equation: each masked voxel becomes the mean of its in-grid neighbors,
/// with Dirichlet values taken from adjacent non-mask voxels and zero-flux
/// behavior on grid border faces. Voxels outside the mask pass through
/// bit-identical. A component with no non-mask neighbor at all raises
/// NoBoundary; running out of iterations returns the partial result with
/// stats.converged = false.
InpaintResult diffusion_inpaint(const Volume& voided, const BinaryMask& mask,
                                const SolverConfig& cfg);

struct BaselineCaseOutcome {
    std::string case_id;
    bool ok = false;
    std::string error;
    InpaintStats stats;
};

struct BaselineSummary {
    SolverConfig cfg;
    std::vector<BaselineCaseOutcome> cases;  // case_id order

    std::int64_t failure_count() const {
        std::int64_t n = 0;
        for (const auto& c : cases) n += !c.ok;
        return n;
    }
};

/// Runs the baseline over every case in dataset_dir (voided volume plus
/// masks), writing `<case_id>-t1n-inference.nii.gz` per case into output_dir.
/// Both the unhealthy and the healthy mask regions are filled. Per-case
/// errors are recorded and the run continues.
BaselineSummary run_baseline(const std::filesystem::path& dataset_dir,
                             const std::filesystem::path& output_dir, const SolverConfig& cfg);

void write_baseline_summary_json(const BaselineSummary& summary,
                                 const std::filesystem::path& path);

}  // namespace ipb

#endif  // IPB_BASELINE_HPP
