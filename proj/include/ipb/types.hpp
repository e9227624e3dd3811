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

#ifndef IPB_TYPES_HPP
#define IPB_TYPES_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipb {

using Index3 = std::array<int, 3>;
using Affine4 = std::array<std::array<double, 4>, 4>;

inline constexpr Affine4 identity_affine() {
    return {{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
}

inline std::int64_t voxel_count(const Index3& dims) {
    return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
}

/// Linear index in x-fastest order.
inline std::int64_t linear_index(const Index3& dims, int x, int y, int z) {
    return x + static_cast<std::int64_t>(dims[0]) * (y + static_cast<std::int64_t>(dims[1]) * z);
}

inline Index3 coord_of(const Index3& dims, std::int64_t idx) {
    const int x = static_cast<int>(idx % dims[0]);
    idx /= dims[0];
    const int y = static_cast<int>(idx % dims[1]);
    const int z = static_cast<int>(idx / dims[1]);
    return {x, y, z};
}

inline bool in_bounds(const Index3& dims, int x, int y, int z) {
    return x >= 0 && x < dims[0] && y >= 0 && y < dims[1] && z >= 0 && z < dims[2];
}

/// Dense 3D scalar grid, voxel data in x-fastest order. Intensities are kept
/// as doubles so every supported on-disk datatype roundtrips losslessly.
struct Volume {
    Index3 dims{0, 0, 0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    Affine4 affine = identity_affine();
    std::vector<double> data;

    std::int64_t size() const { return voxel_count(dims); }
    double& at(int x, int y, int z) { return data[linear_index(dims, x, y, z)]; }
    double at(int x, int y, int z) const { return data[linear_index(dims, x, y, z)]; }
};

/// Dense 3D boolean grid aligned to a companion Volume.
struct BinaryMask {
    Index3 dims{0, 0, 0};
    std::vector<std::uint8_t> voxels;

    std::int64_t size() const { return voxel_count(dims); }
    bool at(int x, int y, int z) const { return voxels[linear_index(dims, x, y, z)] != 0; }
    void set(int x, int y, int z, bool v = true) {
        voxels[linear_index(dims, x, y, z)] = v ? 1 : 0;
    }

    std::int64_t count() const {
        std::int64_t n = 0;
        for (std::uint8_t v : voxels) n += (v != 0);
        return n;
    }
    bool empty_mask() const {
        for (std::uint8_t v : voxels) {
            if (v != 0) return false;
        }
        return true;
    }
};

inline BinaryMask make_mask(const Index3& dims) {
    return BinaryMask{dims, std::vector<std::uint8_t>(static_cast<std::size_t>(voxel_count(dims)), 0)};
}

/// One dataset case; optional members are absent until the corresponding
/// pipeline stage has produced them.
struct CaseRecord {
    std::string case_id;
    Volume t1;
    BinaryMask tumor_mask;
    std::optional<BinaryMask> healthy_mask;
    std::optional<Volume> voided_t1;
};

// Error taxonomy. Every named failure mode gets its own type so call sites
// and tests can discriminate without parsing messages.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadMagic : Error { using Error::Error; };
struct UnsupportedDatatype : Error { using Error::Error; };
struct TruncatedData : Error { using Error::Error; };
struct NonFiniteData : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };
struct MissingFile : Error { using Error::Error; };
struct DimsMismatch : Error { using Error::Error; };
struct EmptyMask : Error { using Error::Error; };
struct EmptyPool : Error { using Error::Error; };
struct NoFeasibleVoxels : Error { using Error::Error; };
struct MissingHealthyMask : Error { using Error::Error; };
struct ZeroDynamicRange : Error { using Error::Error; };
struct NoCommonCases : Error { using Error::Error; };
struct EmptyTable : Error { using Error::Error; };
struct NoBoundary : Error { using Error::Error; };

}  // namespace ipb

#endif  // IPB_TYPES_HPP
