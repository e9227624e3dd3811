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

#include "ipb/mask_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "ipb/nifti.hpp"

namespace ipb {

MaskPool make_pool(std::vector<MaskShape> shapes) {
    MaskPool pool;
    pool.shapes = std::move(shapes);
    pool.sizes_sorted.reserve(pool.shapes.size());
    for (const auto& s : pool.shapes) pool.sizes_sorted.push_back(s.size());
    std::sort(pool.sizes_sorted.begin(), pool.sizes_sorted.end());
    pool.shape_percentiles.reserve(pool.shapes.size());
    for (const auto& s : pool.shapes) pool.shape_percentiles.push_back(size_percentile(pool, s.size()));
    return pool;
}

void pool_add_case(std::vector<MaskShape>& shapes, const std::string& case_id,
                   const BinaryMask& tumor_mask, const SamplerConfig& cfg) {
    for (auto& comp : connected_components(tumor_mask, 26, case_id)) {
        if (comp.size() >= cfg.min_component_voxels) shapes.push_back(std::move(comp));
    }
}

MaskPool extract_pool(const std::vector<CaseRecord>& cases, const SamplerConfig& cfg) {
    std::vector<const CaseRecord*> ordered;
    ordered.reserve(cases.size());
    for (const auto& c : cases) ordered.push_back(&c);
    std::sort(ordered.begin(), ordered.end(),
              [](const CaseRecord* a, const CaseRecord* b) { return a->case_id < b->case_id; });
    std::vector<MaskShape> shapes;
    for (const CaseRecord* c : ordered) pool_add_case(shapes, c->case_id, c->tumor_mask, cfg);
    return make_pool(std::move(shapes));
}

namespace {

constexpr char kPoolMagic[8] = {'I', 'P', 'B', 'P', 'O', 'O', 'L', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void save_pool(const MaskPool& pool, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out.write(kPoolMagic, sizeof(kPoolMagic));
    write_u32(out, static_cast<std::uint32_t>(pool.shapes.size()));
    for (const auto& s : pool.shapes) {
        write_u32(out, static_cast<std::uint32_t>(s.source_case.size()));
        out.write(s.source_case.data(), static_cast<std::streamsize>(s.source_case.size()));
        write_u32(out, static_cast<std::uint32_t>(s.offsets.size()));
        for (const auto& o : s.offsets) {
            const std::int32_t xyz[3] = {o[0], o[1], o[2]};
            out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
        }
    }
    if (!out) throw IoFailure("write failed: " + path.string());
}

MaskPool load_pool(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open pool cache " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kPoolMagic, sizeof(magic)) != 0) {
        throw BadMagic(path.string() + ": not a pool cache");
    }
    const std::uint32_t count = read_u32(in);
    std::vector<MaskShape> shapes;
    shapes.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        MaskShape s;
        const std::uint32_t id_len = read_u32(in);
        s.source_case.resize(id_len);
        in.read(s.source_case.data(), id_len);
        const std::uint32_t nvox = read_u32(in);
        s.offsets.resize(nvox);
        for (auto& o : s.offsets) {
            std::int32_t xyz[3];
            in.read(reinterpret_cast<char*>(xyz), sizeof(xyz));
            o = {xyz[0], xyz[1], xyz[2]};
        }
        if (!in) throw TruncatedData(path.string() + ": pool cache ends early");
        s.offsets = normalize_offsets(std::move(s.offsets));
        shapes.push_back(std::move(s));
    }
    return make_pool(std::move(shapes));
}

double size_percentile(const MaskPool& pool, std::int64_t size) {
    if (pool.sizes_sorted.empty()) throw EmptyPool("size_percentile on an empty pool");
    const auto lo = std::lower_bound(pool.sizes_sorted.begin(), pool.sizes_sorted.end(), size);
    const auto hi = std::upper_bound(pool.sizes_sorted.begin(), pool.sizes_sorted.end(), size);
    const double below = static_cast<double>(lo - pool.sizes_sorted.begin());
    const double equal = static_cast<double>(hi - lo);
    return 100.0 * (below + 0.5 * equal) / static_cast<double>(pool.sizes_sorted.size());
}

const MaskShape& select_shape(const MaskPool& pool, std::int64_t tumor_size,
                              const SamplerConfig& cfg, Rng& rng) {
    if (pool.empty()) throw EmptyPool("select_shape on an empty pool");
    const double target = 100.0 - size_percentile(pool, tumor_size);
    std::vector<std::size_t> band;
    for (double window = cfg.percentile_window; window <= 205.0; window += 5.0) {
        for (std::size_t i = 0; i < pool.shapes.size(); ++i) {
            const double p = pool.shape_percentiles[i];
            if (p >= target - window && p <= target + window) band.push_back(i);
        }
        if (!band.empty()) break;
    }
    // window >= 100 covers all of [0,100], so a nonempty pool always lands here
    return pool.shapes[band[rng.below(band.size())]];
}

BinaryMask nonzero_mask(const Volume& v) {
    BinaryMask m = make_mask(v.dims);
    for (std::size_t i = 0; i < v.data.size(); ++i) m.voxels[i] = v.data[i] != 0.0 ? 1 : 0;
    return m;
}

PlacementContext make_placement_context(const BinaryMask& brain, const BinaryMask& tumor) {
    if (brain.dims != tumor.dims) throw DimsMismatch("placement context: dims differ");
    PlacementContext ctx;
    ctx.dims = brain.dims;
    ctx.tumor_dist2 = edt_squared(tumor);
    const std::int64_t n = brain.size();
    for (std::int64_t i = 0; i < n; ++i) {
        if (brain.voxels[static_cast<std::size_t>(i)] != 0 &&
            tumor.voxels[static_cast<std::size_t>(i)] == 0) {
            ctx.candidates.push_back(i);
        }
    }
    return ctx;
}

Index3 propose_position(const PlacementContext& ctx, Rng& rng) {
    if (ctx.candidates.empty()) throw NoFeasibleVoxels("no brain voxel outside the tumor");
    const std::int64_t a = ctx.candidates[rng.below(ctx.candidates.size())];
    const std::int64_t b = ctx.candidates[rng.below(ctx.candidates.size())];
    const std::int64_t pick =
        ctx.tumor_dist2[static_cast<std::size_t>(b)] > ctx.tumor_dist2[static_cast<std::size_t>(a)]
            ? b
            : a;
    return coord_of(ctx.dims, pick);
}

Index3 propose_position(const BinaryMask& brain, const BinaryMask& tumor, Rng& rng) {
    const PlacementContext ctx = make_placement_context(brain, tumor);
    return propose_position(ctx, rng);
}

const char* reject_reason_name(RejectReason reason) {
    switch (reason) {
        case RejectReason::kNone: return "ok";
        case RejectReason::kTooCloseToTumor: return "too_close_to_tumor";
        case RejectReason::kTooMuchBackground: return "too_much_background";
    }
    return "unknown";
}

namespace {

ValidationResult validate_with_field(const BinaryMask& healthy,
                                     const std::vector<std::int64_t>& tumor_dist2,
                                     const BinaryMask& brain, const SamplerConfig& cfg,
                                     std::int64_t clipped) {
    std::int64_t inside = 0, background = 0;
    std::int64_t min_d2 = std::numeric_limits<std::int64_t>::max();
    const std::int64_t n = healthy.size();
    for (std::int64_t i = 0; i < n; ++i) {
        if (healthy.voxels[static_cast<std::size_t>(i)] == 0) continue;
        ++inside;
        background += brain.voxels[static_cast<std::size_t>(i)] == 0;
        min_d2 = std::min(min_d2, tumor_dist2[static_cast<std::size_t>(i)]);
    }
    if (inside == 0) {
        if (clipped > 0) return {false, RejectReason::kTooMuchBackground};  // fully clipped
        throw EmptyMask("validate_placement: empty healthy mask");
    }
    const double thr = cfg.min_tumor_distance;
    if (static_cast<double>(min_d2) < thr * thr) return {false, RejectReason::kTooCloseToTumor};
    const double allowed = cfg.max_background_overlap * static_cast<double>(inside + clipped);
    if (static_cast<double>(background + clipped) > allowed) {
        return {false, RejectReason::kTooMuchBackground};
    }
    return {true, RejectReason::kNone};
}

}  // namespace

ValidationResult validate_placement(const BinaryMask& healthy, const BinaryMask& tumor_dilated,
                                    const BinaryMask& brain, const SamplerConfig& cfg,
                                    std::int64_t clipped) {
    if (healthy.dims != tumor_dilated.dims || healthy.dims != brain.dims) {
        throw DimsMismatch("validate_placement: dims differ");
    }
    return validate_with_field(healthy, edt_squared(tumor_dilated), brain, cfg, clipped);
}

TransformDraw draw_transform(Rng& rng) {
    TransformDraw t;
    for (int a = 0; a < 3; ++a) t.mirror_axes[static_cast<std::size_t>(a)] = rng.coin();
    t.angle_xy = rng.next_double() * 360.0;
    t.angle_yz = rng.next_double() * 360.0;
    return t;
}

PreparedCase prepare_case(const CaseRecord& rec, const SamplerConfig& cfg) {
    PreparedCase pc;
    pc.dims = rec.t1.dims;
    pc.brain = nonzero_mask(rec.t1);
    pc.tumor_dilated = dilate(rec.tumor_mask, cfg.tumor_dilation_radius);
    pc.ctx = make_placement_context(pc.brain, pc.tumor_dilated);
    pc.tumor_size = rec.tumor_mask.count();
    return pc;
}

SampleResult sample_healthy_mask(const PreparedCase& prepared, const MaskPool& pool,
                                 const SamplerConfig& cfg, Rng& rng) {
    if (pool.empty()) throw EmptyPool("sampling requires a nonempty pool");
    std::int64_t rejected_distance = 0, rejected_background = 0;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        const MaskShape& selected = select_shape(pool, prepared.tumor_size, cfg, rng);
        const TransformDraw t = draw_transform(rng);
        const MaskShape transformed = rotate(mirror(selected, t.mirror_axes), t.angle_xy, t.angle_yz);
        const Index3 center = propose_position(prepared.ctx, rng);
        auto [placed, clipped] = place(transformed, center, prepared.dims);
        const ValidationResult v =
            validate_with_field(placed, prepared.ctx.tumor_dist2, prepared.brain, cfg, clipped);
        if (v.ok) {
            SampleStats stats;
            stats.attempts = attempt;
            stats.shape_source_case = selected.source_case;
            stats.shape_size = selected.size();
            stats.mirror_axes = t.mirror_axes;
            stats.angle_xy = t.angle_xy;
            stats.angle_yz = t.angle_yz;
            stats.center = center;
            stats.clipped = clipped;
            stats.placed_size = placed.count();
            stats.seed = cfg.seed;
            return {std::move(placed), std::move(stats)};
        }
        if (v.reason == RejectReason::kTooCloseToTumor) {
            ++rejected_distance;
        } else {
            ++rejected_background;
        }
    }
    throw MaxAttemptsExceeded("no valid placement after " + std::to_string(cfg.max_attempts) +
                                  " attempts (" + std::to_string(rejected_distance) +
                                  " too close to tumor, " + std::to_string(rejected_background) +
                                  " too much background)",
                              cfg.max_attempts, rejected_distance, rejected_background);
}

SampleResult sample_healthy_mask(const CaseRecord& rec, const MaskPool& pool,
                                 const SamplerConfig& cfg, Rng& rng) {
    return sample_healthy_mask(prepare_case(rec, cfg), pool, cfg, rng);
}

Volume apply_void(const Volume& t1, const BinaryMask& tumor, const BinaryMask& healthy) {
    if (tumor.dims != t1.dims || healthy.dims != t1.dims) {
        throw DimsMismatch("apply_void: dims differ");
    }
    Volume out = t1;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        if (tumor.voxels[i] != 0 || healthy.voxels[i] != 0) out.data[i] = 0.0;
    }
    return out;
}

CaseRecord void_case(const CaseRecord& rec, const SamplerConfig& cfg) {
    if (!rec.healthy_mask.has_value()) {
        throw MissingHealthyMask("case " + rec.case_id + " has no healthy mask to void");
    }
    CaseRecord out = rec;
    out.tumor_mask = dilate(rec.tumor_mask, cfg.tumor_dilation_radius);
    out.voided_t1 = apply_void(rec.t1, out.tumor_mask, *rec.healthy_mask);
    return out;
}

BuildSummary build_dataset(const std::filesystem::path& input_dir,
                           const std::filesystem::path& output_dir, const SamplerConfig& cfg,
                           const BuildOptions& opts, const MaskPool* pool_in) {
    const std::vector<std::string> ids = list_cases(input_dir);
    if (ids.empty()) throw Error("no cases found in " + input_dir.string());

    MaskPool built;
    if (pool_in == nullptr) {
        // Stream tumor masks; cases are already in case_id order.
        std::vector<MaskShape> shapes;
        for (const auto& id : ids) {
            const auto path = find_case_file(input_dir / id, id + "-mask-unhealthy");
            if (path.empty()) continue;  // missing mask surfaces as a per-case error below
            pool_add_case(shapes, id, read_mask(path), cfg);
        }
        built = make_pool(std::move(shapes));
        pool_in = &built;
    }
    if (pool_in->empty()) {
        throw EmptyPool("no tumor component of at least " +
                        std::to_string(cfg.min_component_voxels) + " voxels; pool is empty");
    }
    const MaskPool& pool = *pool_in;

    std::filesystem::create_directories(output_dir);
    const auto case_count = static_cast<std::int64_t>(ids.size());
    std::vector<CaseOutcome> outcomes(ids.size());

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < case_count; ++i) {
        const std::string& id = ids[static_cast<std::size_t>(i)];
        CaseOutcome& outcome = outcomes[static_cast<std::size_t>(i)];
        outcome.case_id = id;
        try {
            const CaseRecord rec = load_case(input_dir, id);
            Rng rng = Rng::for_case(cfg.seed, id);
            const PreparedCase prepared = prepare_case(rec, cfg);

            std::vector<BinaryMask> healthy;
            for (int k = 0; k < opts.masks_per_case; ++k) {
                SampleResult res = sample_healthy_mask(prepared, pool, cfg, rng);
                outcome.masks.push_back(res.stats);
                healthy.push_back(std::move(res.mask));
            }
            BinaryMask healthy_union = healthy.front();
            for (std::size_t k = 1; k < healthy.size(); ++k) {
                for (std::size_t j = 0; j < healthy_union.voxels.size(); ++j) {
                    healthy_union.voxels[j] |= healthy[k].voxels[j];
                }
            }
            const Volume voided = apply_void(rec.t1, prepared.tumor_dilated, healthy_union);

            const std::filesystem::path case_dir = output_dir / id;
            std::filesystem::create_directories(case_dir);
            write_volume(rec.t1, case_dir / (id + "-t1n.nii.gz"), true);
            write_mask(prepared.tumor_dilated, rec.t1, case_dir / (id + "-mask-unhealthy.nii.gz"), true);
            write_mask(healthy.front(), rec.t1, case_dir / (id + "-mask-healthy.nii.gz"), true);
            for (std::size_t k = 1; k < healthy.size(); ++k) {
                write_mask(healthy[k], rec.t1,
                           case_dir / (id + "-mask-healthy-" + std::to_string(k + 1) + ".nii.gz"),
                           true);
            }
            write_volume(voided, case_dir / (id + "-t1n-voided.nii.gz"), true);
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.error = e.what();
        }
    }

    BuildSummary summary;
    summary.cfg = cfg;
    summary.masks_per_case = opts.masks_per_case;
    summary.cases = std::move(outcomes);
    return summary;
}

void write_summary_json(const BuildSummary& summary, const std::filesystem::path& path) {
    nlohmann::json j;
    j["config"] = {
        {"seed", summary.cfg.seed},
        {"min_component_voxels", summary.cfg.min_component_voxels},
        {"min_tumor_distance", summary.cfg.min_tumor_distance},
        {"max_background_overlap", summary.cfg.max_background_overlap},
        {"percentile_window", summary.cfg.percentile_window},
        {"max_attempts", summary.cfg.max_attempts},
        {"tumor_dilation_radius", summary.cfg.tumor_dilation_radius},
        {"masks_per_case", summary.masks_per_case},
    };
    nlohmann::json cases = nlohmann::json::array();
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& c : summary.cases) {
        nlohmann::json cj;
        cj["case_id"] = c.case_id;
        cj["ok"] = c.ok;
        if (!c.ok) {
            cj["error"] = c.error;
            failures.push_back(c.case_id);
        }
        nlohmann::json masks = nlohmann::json::array();
        for (const auto& m : c.masks) {
            masks.push_back({
                {"attempts", m.attempts},
                {"shape_source_case", m.shape_source_case},
                {"shape_size", m.shape_size},
                {"mirror_axes", {m.mirror_axes[0], m.mirror_axes[1], m.mirror_axes[2]}},
                {"angle_xy", m.angle_xy},
                {"angle_yz", m.angle_yz},
                {"center", {m.center[0], m.center[1], m.center[2]}},
                {"clipped", m.clipped},
                {"placed_size", m.placed_size},
                {"seed", m.seed},
            });
        }
        cj["masks"] = std::move(masks);
        cases.push_back(std::move(cj));
    }
    j["cases"] = std::move(cases);
    j["failures"] = std::move(failures);

    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoFailure("write failed: " + path.string());
}

}  // namespace ipb
