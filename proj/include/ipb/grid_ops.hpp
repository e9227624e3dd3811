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

#ifndef IPB_GRID_OPS_HPP
#define IPB_GRID_OPS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "ipb/types.hpp"

namespace ipb {

/// Translation-invariant voxel shape: unique integer offsets normalized so
/// the rounded centroid sits at the origin, kept sorted for canonical form.
struct MaskShape {
    std::vector<Index3> offsets;
    std::string source_case;

    std::int64_t size() const { return static_cast<std::int64_t>(offsets.size()); }
};

/// Per-voxel Euclidean distance (in voxels) to the nearest set voxel.
struct DistanceField {
    Index3 dims{0, 0, 0};
    std::vector<double> values;

    double at(int x, int y, int z) const { return values[linear_index(dims, x, y, z)]; }
};

/// Centroid-normalizes offsets: subtracts the nearest-integer centroid
/// (ties to even, computed in exact integer arithmetic) and sorts. The exact
/// tie rule makes normalization idempotent and mirror an involution.
std::vector<Index3> normalize_offsets(std::vector<Index3> offsets);

/// Labels connected components: labels[i] = component id in [0, count), or -1
/// outside the mask. Ids are ordered by (size descending, then first voxel in
/// scan order). Connectivity must be 6, 18, or 26.
std::pair<std::vector<std::int32_t>, int> label_components(const BinaryMask& mask, int connectivity);

/// Maximal connected sets of true voxels as centroid-normalized shapes,
/// ordered by (size descending, then minimal voxel in scan order).
std::vector<MaskShape> connected_components(const BinaryMask& mask, int connectivity,
                                            const std::string& source_case = {});

/// Exact squared Euclidean distance transform (separable lower-envelope
/// passes, integer arithmetic). Throws EmptyMask on an all-false mask.
std::vector<std::int64_t> edt_squared(const BinaryMask& mask);

/// Exact Euclidean distance transform; values are sqrt of edt_squared.
DistanceField distance_transform(const BinaryMask& mask);

/// True exactly where the Euclidean distance to `mask` is <= radius.
BinaryMask dilate(const BinaryMask& mask, double radius);

/// Negates offsets along each flagged axis, then re-normalizes.
MaskShape mirror(const MaskShape& shape, const std::array<bool, 3>& axes);

/// Rotates offsets in the X-Y plane by angle_xy degrees, then in the Y-Z
/// plane by angle_yz, rounds to the nearest voxel (duplicates collapse), and
/// re-normalizes. (0, 0) is the identity.
MaskShape rotate(const MaskShape& shape, double angle_xy_deg, double angle_yz_deg);

/// Stamps the shape with its origin at `center`; offsets landing outside the
/// grid are dropped and counted.
std::pair<BinaryMask, std::int64_t> place(const MaskShape& shape, const Index3& center,
                                          const Index3& dims);

/// |mask AND region| / |mask|. Throws EmptyMask when mask has no voxels.
double overlap_fraction(const BinaryMask& mask, const BinaryMask& region);

/// Minimal Euclidean distance between any voxel of a and any voxel of b;
/// zero when they overlap. Both masks must be nonempty.
double min_distance(const BinaryMask& a, const BinaryMask& b);

/// Same, but reuses a precomputed edt_squared(b) field.
double min_distance_to_field(const BinaryMask& a, const std::vector<std::int64_t>& b_dist2);

namespace detail {
/// One 1-D pass of the squared-EDT lower-envelope transform.
/// f/d have length n; v (int, length n) and z (double, length n+1) are scratch.
void edt_pass_1d(const std::int64_t* f, std::int64_t* d, int n, int* v, double* z);
inline constexpr std::int64_t kEdtInf = std::int64_t{1} << 50;
}  // namespace detail

}  // namespace ipb

#endif  // IPB_GRID_OPS_HPP
