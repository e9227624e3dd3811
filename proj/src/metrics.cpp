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

#include "ipb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ipb/nifti.hpp"
#include "ipb/parallel.hpp"

namespace ipb {

namespace detail {

std::vector<double> gaussian_kernel(double sigma, int radius) {
    std::vector<double> g(static_cast<std::size_t>(2 * radius + 1));
    for (int d = -radius; d <= radius; ++d) {
        g[static_cast<std::size_t>(d + radius)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    }
    return g;
}

std::vector<double> axis_normalizer(int len, const std::vector<double>& kernel) {
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    std::vector<double> n(static_cast<std::size_t>(len));
    for (int x = 0; x < len; ++x) {
        double s = 0.0;
        for (int d = -radius; d <= radius; ++d) {
            if (x + d >= 0 && x + d < len) s += kernel[static_cast<std::size_t>(d + radius)];
        }
        n[static_cast<std::size_t>(x)] = s;
    }
    return n;
}

std::vector<double> blur_axis(const std::vector<double>& in, const Index3& dims, int axis,
                              const std::vector<double>& kernel) {
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    const int nx = dims[0], ny = dims[1], nz = dims[2];
    std::vector<double> out(in.size());

    if (axis == 0) {
#pragma omp parallel for schedule(static) collapse(2)
        for (int z = 0; z < nz; ++z) {
            for (int y = 0; y < ny; ++y) {
                const std::int64_t row = linear_index(dims, 0, y, z);
                for (int x = 0; x < nx; ++x) {
                    double s = 0.0;
                    const int lo = std::max(-radius, -x), hi = std::min(radius, nx - 1 - x);
                    for (int d = lo; d <= hi; ++d) {
                        s += kernel[static_cast<std::size_t>(d + radius)] *
                             in[static_cast<std::size_t>(row + x + d)];
                    }
                    out[static_cast<std::size_t>(row + x)] = s;
                }
            }
        }
    } else if (axis == 1) {
        const std::int64_t stride = nx;
#pragma omp parallel for schedule(static) collapse(2)
        for (int z = 0; z < nz; ++z) {
            for (int y = 0; y < ny; ++y) {
                const std::int64_t row = linear_index(dims, 0, y, z);
                const int lo = std::max(-radius, -y), hi = std::min(radius, ny - 1 - y);
                for (int x = 0; x < nx; ++x) {
                    double s = 0.0;
                    for (int d = lo; d <= hi; ++d) {
                        s += kernel[static_cast<std::size_t>(d + radius)] *
                             in[static_cast<std::size_t>(row + x + d * stride)];
                    }
                    out[static_cast<std::size_t>(row + x)] = s;
                }
            }
        }
    } else {
        const std::int64_t stride = static_cast<std::int64_t>(nx) * ny;
#pragma omp parallel for schedule(static) collapse(2)
        for (int z = 0; z < nz; ++z) {
            for (int y = 0; y < ny; ++y) {
                const std::int64_t row = linear_index(dims, 0, y, z);
                const int lo = std::max(-radius, -z), hi = std::min(radius, nz - 1 - z);
                for (int x = 0; x < nx; ++x) {
                    double s = 0.0;
                    for (int d = lo; d <= hi; ++d) {
                        s += kernel[static_cast<std::size_t>(d + radius)] *
                             in[static_cast<std::size_t>(row + x + d * stride)];
                    }
                    out[static_cast<std::size_t>(row + x)] = s;
                }
            }
        }
    }
    return out;
}

}  // namespace detail

namespace {

std::vector<double> blur3(std::vector<double> data, const Index3& dims,
                          const std::vector<double>& kernel) {
    data = detail::blur_axis(data, dims, 0, kernel);
    data = detail::blur_axis(data, dims, 1, kernel);
    data = detail::blur_axis(data, dims, 2, kernel);
    return data;
}

void require_same_dims(const Volume& gt, const Volume& pred, const BinaryMask& mask) {
    if (gt.dims != pred.dims || gt.dims != mask.dims) {
        throw DimsMismatch("metric inputs have mismatched dims");
    }
}

}  // namespace

double resolve_dynamic_range(const Volume& gt, const MetricParams& params) {
    double range;
    if (params.dynamic_range.has_value()) {
        range = *params.dynamic_range;
    } else {
        const auto [lo, hi] = std::minmax_element(gt.data.begin(), gt.data.end());
        range = (gt.data.empty()) ? 0.0 : *hi - *lo;
    }
    if (!(range > 0.0) || !std::isfinite(range)) {
        throw ZeroDynamicRange("dynamic range must be positive and finite");
    }
    return range;
}

double mse_masked(const Volume& gt, const Volume& pred, const BinaryMask& mask) {
    require_same_dims(gt, pred, mask);
    const std::int64_t n = mask.size();
    const std::int64_t voxels = chunked_count(n, [&](std::int64_t b, std::int64_t e) {
        std::int64_t c = 0;
        for (std::int64_t i = b; i < e; ++i) c += mask.voxels[static_cast<std::size_t>(i)] != 0;
        return c;
    });
    if (voxels == 0) throw EmptyMask("mse over an empty mask");
    const double sum = chunked_sum(n, [&](std::int64_t b, std::int64_t e) {
        double s = 0.0;
        for (std::int64_t i = b; i < e; ++i) {
            if (mask.voxels[static_cast<std::size_t>(i)] != 0) {
                const double d =
                    gt.data[static_cast<std::size_t>(i)] - pred.data[static_cast<std::size_t>(i)];
                s += d * d;
            }
        }
        return s;
    });
    return sum / static_cast<double>(voxels);
}

double psnr_from_mse(double mse, double dynamic_range, const MetricParams& params) {
    if (mse == 0.0) return params.psnr_cap;
    return 10.0 * std::log10(dynamic_range * dynamic_range / mse);
}

double psnr_masked(const Volume& gt, const Volume& pred, const BinaryMask& mask,
                   const MetricParams& params) {
    const double range = resolve_dynamic_range(gt, params);
    return psnr_from_mse(mse_masked(gt, pred, mask), range, params);
}

std::vector<double> ssim_map(const Volume& gt, const Volume& pred, const MetricParams& params,
                             double dynamic_range) {
    if (gt.dims != pred.dims) throw DimsMismatch("ssim inputs have mismatched dims");
    const Index3 dims = gt.dims;
    const auto n = static_cast<std::int64_t>(gt.data.size());
    const auto kernel = detail::gaussian_kernel(params.window_sigma, params.window_radius);
    const auto norm_x = detail::axis_normalizer(dims[0], kernel);
    const auto norm_y = detail::axis_normalizer(dims[1], kernel);
    const auto norm_z = detail::axis_normalizer(dims[2], kernel);

    std::vector<double> xx(gt.data.size()), yy(gt.data.size()), xy(gt.data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        xx[u] = gt.data[u] * gt.data[u];
        yy[u] = pred.data[u] * pred.data[u];
        xy[u] = gt.data[u] * pred.data[u];
    }

    const std::vector<double> sx = blur3(gt.data, dims, kernel);
    const std::vector<double> sy = blur3(pred.data, dims, kernel);
    const std::vector<double> sxx = blur3(std::move(xx), dims, kernel);
    const std::vector<double> syy = blur3(std::move(yy), dims, kernel);
    const std::vector<double> sxy = blur3(std::move(xy), dims, kernel);

    const double c1 = (params.k1 * dynamic_range) * (params.k1 * dynamic_range);
    const double c2 = (params.k2 * dynamic_range) * (params.k2 * dynamic_range);

    std::vector<double> map(gt.data.size());
#pragma omp parallel for schedule(static) collapse(2)
    for (int z = 0; z < dims[2]; ++z) {
        for (int y = 0; y < dims[1]; ++y) {
            const double nyz = norm_y[static_cast<std::size_t>(y)] * norm_z[static_cast<std::size_t>(z)];
            const std::int64_t row = linear_index(dims, 0, y, z);
            for (int x = 0; x < dims[0]; ++x) {
                const auto i = static_cast<std::size_t>(row + x);
                const double inv = 1.0 / (norm_x[static_cast<std::size_t>(x)] * nyz);
                const double mu_x = sx[i] * inv;
                const double mu_y = sy[i] * inv;
                const double var_x = sxx[i] * inv - mu_x * mu_x;
                const double var_y = syy[i] * inv - mu_y * mu_y;
                const double cov = sxy[i] * inv - mu_x * mu_y;
                map[i] = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
                         ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
            }
        }
    }
    return map;
}

double ssim_masked(const Volume& gt, const Volume& pred, const BinaryMask& mask,
                   const MetricParams& params) {
    require_same_dims(gt, pred, mask);
    const double range = resolve_dynamic_range(gt, params);
    const std::vector<double> map = ssim_map(gt, pred, params, range);
    const std::int64_t n = mask.size();
    const std::int64_t voxels = chunked_count(n, [&](std::int64_t b, std::int64_t e) {
        std::int64_t c = 0;
        for (std::int64_t i = b; i < e; ++i) c += mask.voxels[static_cast<std::size_t>(i)] != 0;
        return c;
    });
    if (voxels == 0) throw EmptyMask("ssim over an empty mask");
    const double sum = chunked_sum(n, [&](std::int64_t b, std::int64_t e) {
        double s = 0.0;
        for (std::int64_t i = b; i < e; ++i) {
            if (mask.voxels[static_cast<std::size_t>(i)] != 0) s += map[static_cast<std::size_t>(i)];
        }
        return s;
    });
    return sum / static_cast<double>(voxels);
}

MetricReport evaluate_case(const Volume& gt, const Volume& pred, const BinaryMask& healthy_mask,
                           const MetricParams& params, const std::string& case_id,
                           const std::string& team_id) {
    require_same_dims(gt, pred, healthy_mask);
    MetricReport r;
    r.case_id = case_id;
    r.team_id = team_id;
    const double range = resolve_dynamic_range(gt, params);
    r.mse = mse_masked(gt, pred, healthy_mask);
    r.psnr = psnr_from_mse(r.mse, range, params);
    r.ssim = ssim_masked(gt, pred, healthy_mask, params);
    r.voxels_evaluated = healthy_mask.count();
    return r;
}

namespace {

std::filesystem::path find_prediction(const std::filesystem::path& pred_dir,
                                      const std::string& case_id) {
    const std::string stem = case_id + "-t1n-inference";
    for (const auto& dir : {pred_dir, pred_dir / case_id}) {
        const auto p = find_case_file(dir, stem);
        if (!p.empty()) return p;
    }
    return {};
}

}  // namespace

std::vector<MetricReport> evaluate_submission(const std::filesystem::path& gt_dir,
                                              const std::filesystem::path& pred_dir,
                                              const MetricParams& params,
                                              const std::string& team_id) {
    const std::vector<std::string> ids = list_cases(gt_dir);
    if (ids.empty()) throw Error("no cases found in " + gt_dir.string());

    const auto count = static_cast<std::int64_t>(ids.size());
    std::vector<MetricReport> reports(ids.size());
    std::vector<std::string> errors(ids.size());

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
        const std::string& id = ids[static_cast<std::size_t>(i)];
        MetricReport& r = reports[static_cast<std::size_t>(i)];
        r.case_id = id;
        r.team_id = team_id;
        try {
            const auto t1_path = find_case_file(gt_dir / id, id + "-t1n");
            const auto mask_path = find_case_file(gt_dir / id, id + "-mask-healthy");
            if (mask_path.empty()) {
                throw MissingFile("case " + id + ": ground truth has no healthy mask");
            }
            const Volume gt = read_volume(t1_path);
            const BinaryMask mask = read_mask(mask_path);
            if (mask.dims != gt.dims) throw DimsMismatch("case " + id + ": healthy mask dims");

            const auto pred_path = find_prediction(pred_dir, id);
            if (pred_path.empty()) {
                r.missing = true;
                r.note = "no prediction file";
            } else {
                try {
                    const Volume pred = read_volume(pred_path);
                    if (pred.dims != gt.dims) {
                        throw DimsMismatch("prediction dims do not match ground truth");
                    }
                    r = evaluate_case(gt, pred, mask, params, id, team_id);
                } catch (const std::exception& e) {
                    // An unreadable or mismatched prediction scores like an
                    // absent one; scoring must not die on one bad submission.
                    r.missing = true;
                    r.note = e.what();
                }
            }
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw Error("ground truth error: " + e);
    }
    bool any_scored = false;
    for (const auto& r : reports) any_scored = any_scored || !r.missing;
    if (!any_scored) {
        throw NoCommonCases("no case in " + gt_dir.string() + " has a prediction in " +
                            pred_dir.string());
    }
    return reports;
}

std::string format_sig9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void write_metrics_csv(const std::vector<MetricReport>& reports, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out << "case_id,team_id,ssim,psnr,mse,voxels\n";
    for (const auto& r : reports) {
        out << r.case_id << ',' << r.team_id << ',';
        if (r.missing) {
            out << ",,,0\n";
        } else {
            out << format_sig9(r.ssim) << ',' << format_sig9(r.psnr) << ',' << format_sig9(r.mse)
                << ',' << r.voxels_evaluated << '\n';
        }
    }
    if (!out) throw IoFailure("write failed: " + path.string());
}

void write_metrics_json(const std::vector<MetricReport>& reports, const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json e;
        e["case_id"] = r.case_id;
        e["team_id"] = r.team_id;
        e["missing"] = r.missing;
        if (!r.missing) {
            // Reparse the 9-digit strings so the JSON mirror and the CSV
            // carry numerically identical values.
            e["ssim"] = std::stod(format_sig9(r.ssim));
            e["psnr"] = std::stod(format_sig9(r.psnr));
            e["mse"] = std::stod(format_sig9(r.mse));
        }
        e["voxels"] = r.missing ? 0 : r.voxels_evaluated;
        if (!r.note.empty()) e["note"] = r.note;
        j.push_back(std::move(e));
    }
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoFailure("write failed: " + path.string());
}

std::vector<MetricReport> parse_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open metrics file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(path.string() + ": empty metrics file");
    if (line == "case_id,team_id,ssim,psnr,mse,voxels\r") line.pop_back();
    if (line != "case_id,team_id,ssim,psnr,mse,voxels") {
        throw Error(path.string() + ": unexpected metrics CSV header: " + line);
    }
    std::vector<MetricReport> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (line.back() == ',') fields.push_back("");
        if (fields.size() != 6) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 6 fields");
        }
        MetricReport r;
        r.case_id = fields[0];
        r.team_id = fields[1];
        if (r.case_id.empty() || r.team_id.empty()) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": empty case or team id");
        }
        if (fields[2].empty() && fields[3].empty() && fields[4].empty()) {
            r.missing = true;
            r.voxels_evaluated = 0;
        } else {
            try {
                std::size_t pos = 0;
                r.ssim = std::stod(fields[2], &pos);
                if (pos != fields[2].size()) throw std::invalid_argument(fields[2]);
                r.psnr = std::stod(fields[3], &pos);
                if (pos != fields[3].size()) throw std::invalid_argument(fields[3]);
                r.mse = std::stod(fields[4], &pos);
                if (pos != fields[4].size()) throw std::invalid_argument(fields[4]);
                r.voxels_evaluated = std::stoll(fields[5], &pos);
                if (pos != fields[5].size()) throw std::invalid_argument(fields[5]);
            } catch (const std::exception&) {
                throw Error(path.string() + ":" + std::to_string(lineno) + ": malformed number");
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ipb
