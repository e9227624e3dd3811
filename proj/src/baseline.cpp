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

#include "ipb/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ipb/grid_ops.hpp"
#include "ipb/nifti.hpp"
#include "ipb/parallel.hpp"

namespace ipb {

const char* solver_method_name(SolverMethod m) {
    switch (m) {
        case SolverMethod::kConjugateGradient: return "conjugate_gradient";
        case SolverMethod::kGaussSeidel: return "gauss_seidel";
    }
    return "unknown";
}

namespace {

// One connected component of the mask as a sparse SPD system
// A x = b, A = deg(p) on the diagonal, -1 for masked 6-neighbors.
struct ComponentSystem {
    std::vector<std::int64_t> voxels;     // linear voxel index per unknown, ascending
    std::vector<double> diag;             // in-grid neighbor count
    std::vector<std::int64_t> nbr_start;  // CSR into nbr_idx, length n+1
    std::vector<std::int32_t> nbr_idx;    // masked-neighbor unknown ids
    std::vector<double> rhs;              // sum of adjacent boundary values
    double boundary_min = 0.0;
    double boundary_max = 0.0;
    std::int64_t boundary_contacts = 0;
};

void apply_matrix(const ComponentSystem& sys, const std::vector<double>& x,
                  std::vector<double>& y) {
    const auto n = static_cast<std::int64_t>(sys.voxels.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        double s = sys.diag[u] * x[u];
        for (std::int64_t k = sys.nbr_start[u]; k < sys.nbr_start[u + 1]; ++k) {
            s -= x[static_cast<std::size_t>(sys.nbr_idx[static_cast<std::size_t>(k)])];
        }
        y[u] = s;
    }
}

void compute_residual(const ComponentSystem& sys, const std::vector<double>& x,
                      std::vector<double>& r) {
    apply_matrix(sys, x, r);
    const auto n = static_cast<std::int64_t>(r.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        r[u] = sys.rhs[u] - r[u];
    }
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    const auto n = static_cast<std::int64_t>(v.size());
#pragma omp parallel for schedule(static) reduction(max : m)
    for (std::int64_t i = 0; i < n; ++i) {
        m = std::max(m, std::abs(v[static_cast<std::size_t>(i)]));
    }
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return chunked_sum(static_cast<std::int64_t>(a.size()), [&](std::int64_t lo, std::int64_t hi) {
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
        }
        return s;
    });
}

struct ComponentSolve {
    std::int64_t iterations = 0;
    double residual_abs = 0.0;
    bool converged = false;
};

ComponentSolve solve_cg(const ComponentSystem& sys, std::vector<double>& x, double threshold,
                        int max_iterations) {
    const std::size_t n = sys.voxels.size();
    std::vector<double> r(n), p(n), ap(n);
    ComponentSolve out;
    bool stalled = false;

    while (out.iterations < max_iterations && !stalled) {
        compute_residual(sys, x, r);  // true residual; also verifies inner-loop convergence
        if (max_abs(r) <= threshold) {
            out.converged = true;
            break;
        }
        p = r;
        double rs = dot(r, r);
        if (rs == 0.0) break;
        while (out.iterations < max_iterations) {
            apply_matrix(sys, p, ap);
            const double p_ap = dot(p, ap);
            if (!(p_ap > 0.0)) {
                stalled = true;
                break;
            }
            const double alpha = rs / p_ap;
            const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < count; ++i) {
                const auto u = static_cast<std::size_t>(i);
                x[u] += alpha * p[u];
                r[u] -= alpha * ap[u];
            }
            ++out.iterations;
            if (max_abs(r) <= threshold) break;  // candidate; outer loop re-verifies
            const double rs_next = dot(r, r);
            const double beta = rs_next / rs;
            rs = rs_next;
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < count; ++i) {
                const auto u = static_cast<std::size_t>(i);
                p[u] = r[u] + beta * p[u];
            }
        }
    }
    compute_residual(sys, x, r);
    out.residual_abs = max_abs(r);
    out.converged = out.residual_abs <= threshold;
    return out;
}

ComponentSolve solve_gauss_seidel(const ComponentSystem& sys, std::vector<double>& x,
                                  double threshold, int max_iterations) {
    const std::size_t n = sys.voxels.size();
    std::vector<double> r(n);
    ComponentSolve out;
    compute_residual(sys, x, r);
    while (max_abs(r) > threshold && out.iterations < max_iterations) {
        // Fixed lexicographic sweep order keeps results reproducible.
        for (std::size_t i = 0; i < n; ++i) {
            double s = sys.rhs[i];
            for (std::int64_t k = sys.nbr_start[i]; k < sys.nbr_start[i + 1]; ++k) {
                s += x[static_cast<std::size_t>(sys.nbr_idx[static_cast<std::size_t>(k)])];
            }
            x[i] = s / sys.diag[i];
        }
        ++out.iterations;
        compute_residual(sys, x, r);
    }
    out.residual_abs = max_abs(r);
    out.converged = out.residual_abs <= threshold;
    return out;
}

}  // namespace

InpaintResult diffusion_inpaint(const Volume& voided, const BinaryMask& mask,
                                const SolverConfig& cfg) {
    if (voided.dims != mask.dims) throw DimsMismatch("inpaint: mask dims do not match volume");
    if (mask.empty_mask()) throw EmptyMask("inpaint: empty mask");

    const Index3 dims = mask.dims;
    auto [labels, ncomp] = label_components(mask, 6);

    std::vector<std::vector<std::int64_t>> comp_voxels(static_cast<std::size_t>(ncomp));
    const std::int64_t total = mask.size();
    for (std::int64_t i = 0; i < total; ++i) {
        const std::int32_t l = labels[static_cast<std::size_t>(i)];
        if (l >= 0) comp_voxels[static_cast<std::size_t>(l)].push_back(i);
    }

    InpaintResult result;
    result.volume = voided;
    result.stats.components = ncomp;

    constexpr int kNbr[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    std::vector<std::int32_t> unknown_of(static_cast<std::size_t>(total), -1);

    for (int comp = 0; comp < ncomp; ++comp) {
        const auto& voxels = comp_voxels[static_cast<std::size_t>(comp)];
        const std::size_t n = voxels.size();
        for (std::size_t i = 0; i < n; ++i) {
            unknown_of[static_cast<std::size_t>(voxels[i])] = static_cast<std::int32_t>(i);
        }

        ComponentSystem sys;
        sys.voxels = voxels;
        sys.diag.resize(n);
        sys.rhs.assign(n, 0.0);
        sys.nbr_start.assign(n + 1, 0);
        sys.boundary_min = std::numeric_limits<double>::infinity();
        sys.boundary_max = -std::numeric_limits<double>::infinity();
        double boundary_sum = 0.0;

        for (std::size_t i = 0; i < n; ++i) {
            const Index3 c = coord_of(dims, voxels[i]);
            int deg = 0;
            for (const auto& d : kNbr) {
                const int x = c[0] + d[0], y = c[1] + d[1], z = c[2] + d[2];
                if (!in_bounds(dims, x, y, z)) continue;  // zero-flux at grid border
                ++deg;
                const std::int64_t q = linear_index(dims, x, y, z);
                if (mask.voxels[static_cast<std::size_t>(q)] != 0) {
                    sys.nbr_idx.push_back(unknown_of[static_cast<std::size_t>(q)]);
                    ++sys.nbr_start[i + 1];
                } else {
                    const double f = voided.data[static_cast<std::size_t>(q)];
                    sys.rhs[i] += f;
                    boundary_sum += f;
                    ++sys.boundary_contacts;
                    sys.boundary_min = std::min(sys.boundary_min, f);
                    sys.boundary_max = std::max(sys.boundary_max, f);
                }
            }
            sys.diag[i] = static_cast<double>(deg);
        }
        for (std::size_t i = 0; i < n; ++i) sys.nbr_start[i + 1] += sys.nbr_start[i];

        if (sys.boundary_contacts == 0) {
            throw NoBoundary("mask component " + std::to_string(comp) +
                             " has no tissue neighbor to take boundary values from");
        }

        const double range = sys.boundary_max - sys.boundary_min;
        const double scale = range > 0.0 ? range : std::max(1.0, std::abs(sys.boundary_max));
        const double threshold = cfg.tolerance * scale;

        // Starting from the boundary mean makes the constant-boundary case
        // exact and is a decent guess elsewhere.
        std::vector<double> x(n, boundary_sum / static_cast<double>(sys.boundary_contacts));
        const ComponentSolve solve =
            cfg.method == SolverMethod::kConjugateGradient
                ? solve_cg(sys, x, threshold, cfg.max_iterations)
                : solve_gauss_seidel(sys, x, threshold, cfg.max_iterations);

        for (std::size_t i = 0; i < n; ++i) {
            result.volume.data[static_cast<std::size_t>(voxels[i])] = x[i];
        }
        result.stats.iterations += solve.iterations;
        result.stats.max_residual_abs = std::max(result.stats.max_residual_abs, solve.residual_abs);
        result.stats.max_residual = std::max(result.stats.max_residual, solve.residual_abs / scale);
        result.stats.converged = result.stats.converged && solve.converged;
    }
    return result;
}

BaselineSummary run_baseline(const std::filesystem::path& dataset_dir,
                             const std::filesystem::path& output_dir, const SolverConfig& cfg) {
    const std::vector<std::string> ids = list_cases(dataset_dir);
    if (ids.empty()) throw Error("no cases found in " + dataset_dir.string());
    std::filesystem::create_directories(output_dir);

    BaselineSummary summary;
    summary.cfg = cfg;
    summary.cases.resize(ids.size());
    const auto count = static_cast<std::int64_t>(ids.size());

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
        const std::string& id = ids[static_cast<std::size_t>(i)];
        BaselineCaseOutcome& outcome = summary.cases[static_cast<std::size_t>(i)];
        outcome.case_id = id;
        try {
            const std::filesystem::path case_dir = dataset_dir / id;
            const auto voided_path = find_case_file(case_dir, id + "-t1n-voided");
            if (voided_path.empty()) throw MissingFile("case " + id + ": no voided volume");
            const auto unhealthy_path = find_case_file(case_dir, id + "-mask-unhealthy");
            if (unhealthy_path.empty()) throw MissingFile("case " + id + ": no unhealthy mask");

            const Volume voided = read_volume(voided_path);
            BinaryMask fill = read_mask(unhealthy_path);
            if (fill.dims != voided.dims) throw DimsMismatch("case " + id + ": mask dims");
            if (const auto healthy_path = find_case_file(case_dir, id + "-mask-healthy");
                !healthy_path.empty()) {
                const BinaryMask healthy = read_mask(healthy_path);
                if (healthy.dims != fill.dims) throw DimsMismatch("case " + id + ": mask dims");
                for (std::size_t j = 0; j < fill.voxels.size(); ++j) {
                    fill.voxels[j] |= healthy.voxels[j];
                }
            }

            InpaintResult res = diffusion_inpaint(voided, fill, cfg);
            write_volume(res.volume, output_dir / (id + "-t1n-inference.nii.gz"), true);
            outcome.stats = res.stats;
            outcome.ok = true;
            if (!res.stats.converged) {
                outcome.error = "solver did not reach tolerance (partial result written)";
            }
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.error = e.what();
        }
    }
    return summary;
}

void write_baseline_summary_json(const BaselineSummary& summary,
                                 const std::filesystem::path& path) {
    nlohmann::json j;
    j["config"] = {
        {"tolerance", summary.cfg.tolerance},
        {"max_iterations", summary.cfg.max_iterations},
        {"method", solver_method_name(summary.cfg.method)},
    };
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : summary.cases) {
        nlohmann::json cj;
        cj["case_id"] = c.case_id;
        cj["ok"] = c.ok;
        cj["method"] = solver_method_name(summary.cfg.method);
        if (c.ok) {
            cj["iterations"] = c.stats.iterations;
            cj["max_residual"] = c.stats.max_residual;
            cj["max_residual_abs"] = c.stats.max_residual_abs;
            cj["components"] = c.stats.components;
            cj["converged"] = c.stats.converged;
        }
        if (!c.error.empty()) cj["error"] = c.error;
        cases.push_back(std::move(cj));
    }
    j["cases"] = std::move(cases);

    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoFailure("write failed: " + path.string());
}

}  // namespace ipb
