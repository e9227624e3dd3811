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

#include "ipb/grid_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ipb {
namespace {

/// Nearest integer to s/n with ties to even, exact on integers. n > 0.
std::int64_t round_div_even(std::int64_t s, std::int64_t n) {
    std::int64_t q = s / n;
    std::int64_t r = s % n;
    if (r < 0) {  // make the remainder nonnegative (floor division)
        q -= 1;
        r += n;
    }
    if (2 * r < n) return q;
    if (2 * r > n) return q + 1;
    return (q % 2 == 0) ? q : q + 1;
}

std::vector<Index3> neighbor_offsets(int connectivity) {
    std::vector<Index3> out;
    for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (manhattan == 0) continue;
                if (connectivity == 6 && manhattan > 1) continue;
                if (connectivity == 18 && manhattan > 2) continue;
                out.push_back({dx, dy, dz});
            }
        }
    }
    return out;
}

}  // namespace

std::vector<Index3> normalize_offsets(std::vector<Index3> offsets) {
    if (offsets.empty()) return offsets;
    std::int64_t sum[3] = {0, 0, 0};
    for (const auto& o : offsets) {
        for (int a = 0; a < 3; ++a) sum[a] += o[a];
    }
    const auto n = static_cast<std::int64_t>(offsets.size());
    Index3 centroid{};
    for (int a = 0; a < 3; ++a) centroid[a] = static_cast<int>(round_div_even(sum[a], n));
    for (auto& o : offsets) {
        for (int a = 0; a < 3; ++a) o[a] -= centroid[a];
    }
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    return offsets;
}

std::pair<std::vector<std::int32_t>, int> label_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 6 && connectivity != 18 && connectivity != 26) {
        throw Error("connectivity must be 6, 18, or 26");
    }
    const Index3 dims = mask.dims;
    const std::int64_t n = mask.size();
    std::vector<std::int32_t> labels(static_cast<std::size_t>(n), -1);
    const auto nbrs = neighbor_offsets(connectivity);

    struct CompInfo {
        std::int64_t size;
        std::int64_t first_voxel;  // scan-order anchor, used for ordering
        std::int32_t id;
    };
    std::vector<CompInfo> comps;
    std::vector<std::int64_t> stack;

    std::int32_t next = 0;
    for (std::int64_t start = 0; start < n; ++start) {
        if (mask.voxels[start] == 0 || labels[start] != -1) continue;
        std::int64_t size = 0;
        stack.clear();
        stack.push_back(start);
        labels[start] = next;
        while (!stack.empty()) {
            const std::int64_t cur = stack.back();
            stack.pop_back();
            ++size;
            const Index3 c = coord_of(dims, cur);
            for (const auto& d : nbrs) {
                const int x = c[0] + d[0], y = c[1] + d[1], z = c[2] + d[2];
                if (!in_bounds(dims, x, y, z)) continue;
                const std::int64_t q = linear_index(dims, x, y, z);
                if (mask.voxels[q] != 0 && labels[q] == -1) {
                    labels[q] = next;
                    stack.push_back(q);
                }
            }
        }
        comps.push_back({size, start, next});
        ++next;
    }

    // Renumber: biggest first, scan order breaking ties.
    std::sort(comps.begin(), comps.end(), [](const CompInfo& a, const CompInfo& b) {
        if (a.size != b.size) return a.size > b.size;
        return a.first_voxel < b.first_voxel;
    });
    std::vector<std::int32_t> remap(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) remap[static_cast<std::size_t>(comps[i].id)] = static_cast<std::int32_t>(i);
    for (auto& l : labels) {
        if (l >= 0) l = remap[static_cast<std::size_t>(l)];
    }
    return {std::move(labels), next};
}

std::vector<MaskShape> connected_components(const BinaryMask& mask, int connectivity,
                                            const std::string& source_case) {
    auto [labels, count] = label_components(mask, connectivity);
    std::vector<std::vector<Index3>> voxels(static_cast<std::size_t>(count));
    const Index3 dims = mask.dims;
    const std::int64_t n = mask.size();
    for (std::int64_t i = 0; i < n; ++i) {
        if (labels[i] >= 0) voxels[static_cast<std::size_t>(labels[i])].push_back(coord_of(dims, i));
    }
    std::vector<MaskShape> out;
    out.reserve(static_cast<std::size_t>(count));
    for (auto& vs : voxels) {
        MaskShape s;
        s.offsets = normalize_offsets(std::move(vs));
        s.source_case = source_case;
        out.push_back(std::move(s));
    }
    return out;
}

namespace detail {

void edt_pass_1d(const std::int64_t* f, std::int64_t* d, int n, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        const auto fq = static_cast<double>(f[q] + static_cast<std::int64_t>(q) * q);
        double s = (fq - static_cast<double>(f[v[k]] + static_cast<std::int64_t>(v[k]) * v[k])) /
                   (2.0 * (q - v[k]));
        while (s <= z[k]) {
            --k;
            s = (fq - static_cast<double>(f[v[k]] + static_cast<std::int64_t>(v[k]) * v[k])) /
                (2.0 * (q - v[k]));
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int p = 0; p < n; ++p) {
        while (z[k + 1] < static_cast<double>(p)) ++k;
        const std::int64_t dp = p - v[k];
        d[p] = dp * dp + f[v[k]];
    }
}

}  // namespace detail

std::vector<std::int64_t> edt_squared(const BinaryMask& mask) {
    if (mask.empty_mask()) throw EmptyMask("distance transform of an empty mask");
    const Index3 dims = mask.dims;
    const int nx = dims[0], ny = dims[1], nz = dims[2];
    const std::int64_t n = mask.size();
    std::vector<std::int64_t> dist(static_cast<std::size_t>(n));
    const int max_dim = std::max({nx, ny, nz});

    // Pass 1 along x on the 0/inf indicator.
#pragma omp parallel
    {
        std::vector<std::int64_t> f(static_cast<std::size_t>(max_dim));
        std::vector<std::int64_t> d(static_cast<std::size_t>(max_dim));
        std::vector<int> v(static_cast<std::size_t>(max_dim));
        std::vector<double> z(static_cast<std::size_t>(max_dim) + 1);

#pragma omp for schedule(static) collapse(2)
        for (int zc = 0; zc < nz; ++zc) {
            for (int yc = 0; yc < ny; ++yc) {
                const std::int64_t row = linear_index(dims, 0, yc, zc);
                for (int x = 0; x < nx; ++x) {
                    f[static_cast<std::size_t>(x)] = mask.voxels[row + x] ? 0 : detail::kEdtInf;
                }
                detail::edt_pass_1d(f.data(), d.data(), nx, v.data(), z.data());
                for (int x = 0; x < nx; ++x) dist[row + x] = d[static_cast<std::size_t>(x)];
            }
        }

        // Pass 2 along y.
#pragma omp for schedule(static) collapse(2)
        for (int zc = 0; zc < nz; ++zc) {
            for (int x = 0; x < nx; ++x) {
                for (int y = 0; y < ny; ++y) {
                    f[static_cast<std::size_t>(y)] = dist[linear_index(dims, x, y, zc)];
                }
                detail::edt_pass_1d(f.data(), d.data(), ny, v.data(), z.data());
                for (int y = 0; y < ny; ++y) {
                    dist[linear_index(dims, x, y, zc)] = d[static_cast<std::size_t>(y)];
                }
            }
        }

        // Pass 3 along z.
#pragma omp for schedule(static) collapse(2)
        for (int yc = 0; yc < ny; ++yc) {
            for (int x = 0; x < nx; ++x) {
                for (int zc = 0; zc < nz; ++zc) {
                    f[static_cast<std::size_t>(zc)] = dist[linear_index(dims, x, yc, zc)];
                }
                detail::edt_pass_1d(f.data(), d.data(), nz, v.data(), z.data());
                for (int zc = 0; zc < nz; ++zc) {
                    dist[linear_index(dims, x, yc, zc)] = d[static_cast<std::size_t>(zc)];
                }
            }
        }
    }
    return dist;
}

DistanceField distance_transform(const BinaryMask& mask) {
    const auto d2 = edt_squared(mask);
    DistanceField field;
    field.dims = mask.dims;
    field.values.resize(d2.size());
    const auto n = static_cast<std::int64_t>(d2.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        field.values[static_cast<std::size_t>(i)] =
            std::sqrt(static_cast<double>(d2[static_cast<std::size_t>(i)]));
    }
    return field;
}

BinaryMask dilate(const BinaryMask& mask, double radius) {
    if (radius < 0.0) throw Error("dilation radius must be nonnegative");
    if (radius == 0.0) return mask;
    const auto d2 = edt_squared(mask);
    BinaryMask out = make_mask(mask.dims);
    const double r2 = radius * radius;
    const auto n = static_cast<std::int64_t>(d2.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        out.voxels[static_cast<std::size_t>(i)] =
            static_cast<double>(d2[static_cast<std::size_t>(i)]) <= r2 ? 1 : 0;
    }
    return out;
}

MaskShape mirror(const MaskShape& shape, const std::array<bool, 3>& axes) {
    std::vector<Index3> offsets = shape.offsets;
    for (auto& o : offsets) {
        for (int a = 0; a < 3; ++a) {
            if (axes[static_cast<std::size_t>(a)]) o[a] = -o[a];
        }
    }
    MaskShape out;
    out.offsets = normalize_offsets(std::move(offsets));
    out.source_case = shape.source_case;
    return out;
}

MaskShape rotate(const MaskShape& shape, double angle_xy_deg, double angle_yz_deg) {
    constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
    const double cxy = std::cos(angle_xy_deg * kDegToRad);
    const double sxy = std::sin(angle_xy_deg * kDegToRad);
    const double cyz = std::cos(angle_yz_deg * kDegToRad);
    const double syz = std::sin(angle_yz_deg * kDegToRad);

    std::vector<Index3> rotated;
    rotated.reserve(shape.offsets.size());
    for (const auto& o : shape.offsets) {
        const double x1 = o[0] * cxy - o[1] * sxy;
        const double y1 = o[0] * sxy + o[1] * cxy;
        const double z1 = o[2];
        const double y2 = y1 * cyz - z1 * syz;
        const double z2 = y1 * syz + z1 * cyz;
        rotated.push_back({static_cast<int>(std::llround(x1)), static_cast<int>(std::llround(y2)),
                           static_cast<int>(std::llround(z2))});
    }
    MaskShape out;
    out.offsets = normalize_offsets(std::move(rotated));  // also collapses duplicates
    out.source_case = shape.source_case;
    return out;
}

std::pair<BinaryMask, std::int64_t> place(const MaskShape& shape, const Index3& center,
                                          const Index3& dims) {
    BinaryMask mask = make_mask(dims);
    std::int64_t clipped = 0;
    for (const auto& o : shape.offsets) {
        const int x = center[0] + o[0], y = center[1] + o[1], z = center[2] + o[2];
        if (in_bounds(dims, x, y, z)) {
            mask.voxels[linear_index(dims, x, y, z)] = 1;
        } else {
            ++clipped;
        }
    }
    return {std::move(mask), clipped};
}

double overlap_fraction(const BinaryMask& mask, const BinaryMask& region) {
    if (mask.dims != region.dims) throw DimsMismatch("overlap_fraction: dims differ");
    std::int64_t total = 0, inside = 0;
    const std::int64_t n = mask.size();
    for (std::int64_t i = 0; i < n; ++i) {
        if (mask.voxels[static_cast<std::size_t>(i)] != 0) {
            ++total;
            inside += region.voxels[static_cast<std::size_t>(i)] != 0;
        }
    }
    if (total == 0) throw EmptyMask("overlap_fraction: empty mask");
    return static_cast<double>(inside) / static_cast<double>(total);
}

double min_distance_to_field(const BinaryMask& a, const std::vector<std::int64_t>& b_dist2) {
    if (a.voxels.size() != b_dist2.size()) throw DimsMismatch("min_distance: dims differ");
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    const auto n = static_cast<std::int64_t>(b_dist2.size());
    for (std::int64_t i = 0; i < n; ++i) {
        if (a.voxels[static_cast<std::size_t>(i)] != 0) {
            best = std::min(best, b_dist2[static_cast<std::size_t>(i)]);
        }
    }
    if (best == std::numeric_limits<std::int64_t>::max()) throw EmptyMask("min_distance: empty mask");
    return std::sqrt(static_cast<double>(best));
}

double min_distance(const BinaryMask& a, const BinaryMask& b) {
    if (a.dims != b.dims) throw DimsMismatch("min_distance: dims differ");
    return min_distance_to_field(a, edt_squared(b));
}

}  // namespace ipb
