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

#ifndef IPB_RANKING_HPP
#define IPB_RANKING_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipb/metrics.hpp"
#include "ipb/types.hpp"

namespace ipb {

enum class Metric { kSsim = 0, kPsnr = 1, kMse = 2 };
inline constexpr std::array<Metric, 3> kAllMetrics{Metric::kSsim, Metric::kPsnr, Metric::kMse};

const char* metric_name(Metric m);
/// SSIM and PSNR reward larger values; MSE rewards smaller.
bool metric_higher_better(Metric m);

/// Scores for teams x cases; a cell is either all three metrics or missing.
struct ScoreTable {
    std::vector<std::string> teams;  // sorted unique
    std::vector<std::string> cases;  // sorted unique
    std::vector<std::optional<std::array<double, 3>>> cells;  // team-major

    const std::optional<std::array<double, 3>>& cell(std::size_t team, std::size_t kase) const {
        return cells[team * cases.size() + kase];
    }
};

/// Assembles a table from per-team metric reports (e.g. parsed CSVs).
/// Duplicate (team, case) rows or non-finite scores are rejected.
ScoreTable make_score_table(const std::vector<MetricReport>& reports);

/// Midranks: 1 = best by the metric's orientation; tied values share the
/// average of the positions they occupy. Missing cells rank T (worst).
/// Returns a team-major T x C matrix.
std::vector<double> per_case_ranks(const ScoreTable& table, Metric metric);

/// Sums per-case ranks per team, then ranks teams by that sum (1 = smallest,
/// midranks on ties).
std::vector<double> metric_rank(const ScoreTable& table, Metric metric);

struct Leaderboard {
    std::string tie_break_rule;
    std::vector<std::string> teams;                       // aligned with rank vectors
    std::array<std::vector<double>, 3> per_metric_ranks;  // [metric][team]
    std::vector<double> final_rank_sum;                   // per team
    std::vector<std::string> final_order;                 // best first
};

/// Equally weighted rank-sum across SSIM, PSNR, and MSE. Residual ties break
/// by better SSIM metric rank, then team id; the rule is recorded in the
/// output.
Leaderboard final_ranking(const ScoreTable& table);

void write_leaderboard_json(const Leaderboard& board, const std::filesystem::path& path);
/// Flat view: team_id,ssim_rank,psnr_rank,mse_rank,rank_sum,final_position.
void write_leaderboard_csv(const Leaderboard& board, const std::filesystem::path& path);

/// Midranks of `values`: rank 1 is the largest value when higher_better,
/// else the smallest. Exposed for reuse and testing.
std::vector<double> midranks(const std::vector<double>& values, bool higher_better);

}  // namespace ipb

#endif  // IPB_RANKING_HPP
