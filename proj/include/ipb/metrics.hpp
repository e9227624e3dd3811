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

#ifndef IPB_METRICS_HPP
#define IPB_METRICS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipb/types.hpp"

namespace ipb {

/// SSIM/PSNR knobs. The SSIM window is an isotropic 3D Gaussian
/// (sigma 1.5, 11^3 support), clipped and renormalized at volume borders.
/// When dynamic_range is absent it is taken as max-min of the ground truth.
struct MetricParams {
    double k1 = 0.01;
    double k2 = 0.03;
    double window_sigma = 1.5;
    int window_radius = 5;
    std::optional<double> dynamic_range;
    double psnr_cap = 100.0;  // reported when MSE is exactly 0
};

struct MetricReport {
    std::string case_id;
    std::string team_id;
    double ssim = 0.0;
    double psnr = 0.0;
    double mse = 0.0;
    std::int64_t voxels_evaluated = 0;
    bool missing = false;
    std::string note;
};

/// Resolves the dynamic range L; throws ZeroDynamicRange when <= 0.
double resolve_dynamic_range(const Volume& gt, const MetricParams& params);

/// Mean squared error over mask voxels only.
double mse_masked(const Volume& gt, const Volume& pred, const BinaryMask& mask);

/// 10*log10(L^2 / MSE); params.psnr_cap when MSE is exactly zero.
double psnr_masked(const Volume& gt, const Volume& pred, const BinaryMask& mask,
                   const MetricParams& params);
double psnr_from_mse(double mse, double dynamic_range, const MetricParams& params);

/// Full-volume local-statistics SSIM map, averaged over mask voxels. Local
/// moments near the mask border legitimately use surrounding tissue.
double ssim_masked(const Volume& gt, const Volume& pred, const BinaryMask& mask,
                   const MetricParams& params);

/// The SSIM map itself (one value per voxel), exposed for tests and tools.
std::vector<double> ssim_map(const Volume& gt, const Volume& pred, const MetricParams& params,
                             double dynamic_range);

/// All three metrics over exactly the healthy mask.
MetricReport evaluate_case(const Volume& gt, const Volume& pred, const BinaryMask& healthy_mask,
                           const MetricParams& params, const std::string& case_id = {},
                           const std::string& team_id = {});

/// Scores one prediction directory against a ground-truth dataset. Cases
/// without a prediction file yield a report with missing = true; if no case
/// has one at all, throws NoCommonCases. Reports come back in case_id order.
std::vector<MetricReport> evaluate_submission(const std::filesystem::path& gt_dir,
                                              const std::filesystem::path& pred_dir,
                                              const MetricParams& params,
                                              const std::string& team_id);

// Metrics file interface: CSV `case_id,team_id,ssim,psnr,mse,voxels` plus a
// JSON mirror; numbers carry 9 significant digits. A missing prediction is a
// row with empty metric fields and voxels 0.
void write_metrics_csv(const std::vector<MetricReport>& reports, const std::filesystem::path& path);
void write_metrics_json(const std::vector<MetricReport>& reports, const std::filesystem::path& path);
std::vector<MetricReport> parse_metrics_csv(const std::filesystem::path& path);

/// Shortest-of-9-significant-digits formatting used by both serializers.
std::string format_sig9(double v);

namespace detail {
std::vector<double> gaussian_kernel(double sigma, int radius);
/// Per-coordinate sum of in-bounds kernel weights along one axis.
std::vector<double> axis_normalizer(int len, const std::vector<double>& kernel);
/// 1-D convolution along `axis` with border clipping (no normalization).
std::vector<double> blur_axis(const std::vector<double>& in, const Index3& dims, int axis,
                              const std::vector<double>& kernel);
}  // namespace detail

}  // namespace ipb

#endif  // IPB_METRICS_HPP
