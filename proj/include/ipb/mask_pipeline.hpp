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

#ifndef IPB_MASK_PIPELINE_HPP
#define IPB_MASK_PIPELINE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "ipb/grid_ops.hpp"
#include "ipb/rng.hpp"
#include "ipb/types.hpp"

namespace ipb {

/// Knobs of the healthy-mask sampler. Defaults: components of at least 800
/// voxels enter the pool; a placement is valid when it keeps at least
/// 5 voxels Euclidean distance to the dilated tumor and at most 25% of its
/// voxels over background.
struct SamplerConfig {
    std::int64_t min_component_voxels = 800;
    double min_tumor_distance = 5.0;
    double max_background_overlap = 0.25;
    double percentile_window = 5.0;
    int max_attempts = 1000;
    double tumor_dilation_radius = 3.0;
    std::uint64_t seed = 42;
};

/// Shape pool with cached size order for percentile queries.
struct MaskPool {
    std::vector<MaskShape> shapes;
    std::vector<std::int64_t> sizes_sorted;      // ascending
    std::vector<double> shape_percentiles;       // aligned with shapes

    bool empty() const { return shapes.empty(); }
};

MaskPool make_pool(std::vector<MaskShape> shapes);

/// Appends the qualifying tumor components of one case (26-connectivity,
/// size >= cfg.min_component_voxels) to `shapes`.
void pool_add_case(std::vector<MaskShape>& shapes, const std::string& case_id,
                   const BinaryMask& tumor_mask, const SamplerConfig& cfg);

/// Builds the pool from whole cases; cases are visited in case_id order so
/// the pool layout does not depend on input order.
MaskPool extract_pool(const std::vector<CaseRecord>& cases, const SamplerConfig& cfg);

/// Binary pool cache (little-endian): magic "IPBPOOL1", then a uint32 shape
/// count, then per shape: uint32 id length, id bytes, uint32 voxel count,
/// and that many int32 (x, y, z) offset triples.
void save_pool(const MaskPool& pool, const std::filesystem::path& path);
MaskPool load_pool(const std::filesystem::path& path);

/// Midrank percentile of `size` within the pool:
/// 100 * (count below + 0.5 * count equal) / N. Throws EmptyPool.
double size_percentile(const MaskPool& pool, std::int64_t size);

/// Picks a shape uniformly among those whose size percentile lies within
/// (100 - percentile(tumor_size)) +- cfg.percentile_window, widening the
/// window in 5-point steps until the band is populated.
const MaskShape& select_shape(const MaskPool& pool, std::int64_t tumor_size,
                              const SamplerConfig& cfg, Rng& rng);

/// Voxels where the volume is nonzero; the working definition of "brain".
BinaryMask nonzero_mask(const Volume& v);

/// Precomputed per-case placement inputs shared across sampling attempts.
struct PlacementContext {
    Index3 dims{0, 0, 0};
    std::vector<std::int64_t> candidates;   // linear indices of brain minus tumor
    std::vector<std::int64_t> tumor_dist2;  // edt_squared of the tumor mask
};

PlacementContext make_placement_context(const BinaryMask& brain, const BinaryMask& tumor);

/// Samples two candidate voxels and returns the one farther from the tumor
/// (ties keep the first). Throws NoFeasibleVoxels when no candidate exists.
Index3 propose_position(const PlacementContext& ctx, Rng& rng);
Index3 propose_position(const BinaryMask& brain, const BinaryMask& tumor, Rng& rng);

enum class RejectReason { kNone, kTooCloseToTumor, kTooMuchBackground };

struct ValidationResult {
    bool ok;
    RejectReason reason;
};

const char* reject_reason_name(RejectReason reason);

/// Checks the two validity rules in order: distance to the (dilated) tumor,
/// then background overlap. `clipped` counts shape voxels that fell outside
/// the grid; they are treated as background and enter both sides of the
/// overlap ratio.
ValidationResult validate_placement(const BinaryMask& healthy, const BinaryMask& tumor_dilated,
                                    const BinaryMask& brain, const SamplerConfig& cfg,
                                    std::int64_t clipped = 0);

/// One transform decision: three independent fair mirror coins, then two
/// rotation angles uniform in [0, 360) degrees, in that draw order.
struct TransformDraw {
    std::array<bool, 3> mirror_axes;
    double angle_xy;
    double angle_yz;
};

TransformDraw draw_transform(Rng& rng);

struct SampleStats {
    int attempts = 0;
    std::string shape_source_case;
    std::int64_t shape_size = 0;
    std::array<bool, 3> mirror_axes{false, false, false};
    double angle_xy = 0.0;
    double angle_yz = 0.0;
    Index3 center{0, 0, 0};
    std::int64_t clipped = 0;
    std::int64_t placed_size = 0;
    std::uint64_t seed = 0;
};

struct SampleResult {
    BinaryMask mask;
    SampleStats stats;
};

struct MaxAttemptsExceeded : Error {
    MaxAttemptsExceeded(const std::string& msg, int attempts_, std::int64_t rejected_distance_,
                        std::int64_t rejected_background_)
        : Error(msg),
          attempts(attempts_),
          rejected_distance(rejected_distance_),
          rejected_background(rejected_background_) {}

    int attempts;
    std::int64_t rejected_distance;
    std::int64_t rejected_background;
};

/// Per-case state reused across attempts and masks.
struct PreparedCase {
    Index3 dims{0, 0, 0};
    BinaryMask brain;
    BinaryMask tumor_dilated;
    PlacementContext ctx;
    std::int64_t tumor_size = 0;  // raw annotation voxel count
};

PreparedCase prepare_case(const CaseRecord& rec, const SamplerConfig& cfg);

/// Select -> mirror -> rotate -> position -> place -> validate, repeated
/// until a valid configuration is found or cfg.max_attempts is exhausted.
/// The result is fully determined by the rng stream (i.e. by seed and case).
SampleResult sample_healthy_mask(const PreparedCase& prepared, const MaskPool& pool,
                                 const SamplerConfig& cfg, Rng& rng);
SampleResult sample_healthy_mask(const CaseRecord& rec, const MaskPool& pool,
                                 const SamplerConfig& cfg, Rng& rng);

/// T1 with every voxel under either mask set to exactly zero.
Volume apply_void(const Volume& t1, const BinaryMask& tumor, const BinaryMask& healthy);

/// Replaces the tumor mask by its dilation and fills voided_t1. Requires a
/// healthy mask (MissingHealthyMask otherwise).
CaseRecord void_case(const CaseRecord& rec, const SamplerConfig& cfg);

struct BuildOptions {
    int masks_per_case = 1;
};

struct CaseOutcome {
    std::string case_id;
    bool ok = false;
    std::string error;
    std::vector<SampleStats> masks;
};

struct BuildSummary {
    SamplerConfig cfg;
    int masks_per_case = 1;
    std::vector<CaseOutcome> cases;  // case_id order

    std::int64_t failure_count() const {
        std::int64_t n = 0;
        for (const auto& c : cases) n += !c.ok;
        return n;
    }
};

/// Full dataset pass: streams tumor masks to build the pool (unless one is
/// supplied), then samples, voids, and writes each case. Per-case failures
/// are recorded in the summary and the run continues.
BuildSummary build_dataset(const std::filesystem::path& input_dir,
                           const std::filesystem::path& output_dir, const SamplerConfig& cfg,
                           const BuildOptions& opts = {}, const MaskPool* pool = nullptr);

void write_summary_json(const BuildSummary& summary, const std::filesystem::path& path);

}  // namespace ipb

#endif  // IPB_MASK_PIPELINE_HPP
