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

#include "ipb/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

namespace ipb {

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::kSsim: return "ssim";
        case Metric::kPsnr: return "psnr";
        case Metric::kMse: return "mse";
    }
    return "unknown";
}

bool metric_higher_better(Metric m) { return m != Metric::kMse; }

std::vector<double> midranks(const std::vector<double>& values, bool higher_better) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return higher_better ? values[a] > values[b] : values[a] < values[b];
        return a < b;
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

ScoreTable make_score_table(const std::vector<MetricReport>& reports) {
    ScoreTable table;
    for (const auto& r : reports) {
        table.teams.push_back(r.team_id);
        table.cases.push_back(r.case_id);
    }
    auto dedup = [](std::vector<std::string>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedup(table.teams);
    dedup(table.cases);
    if (table.teams.empty() || table.cases.empty()) {
        throw EmptyTable("score table needs at least one team and one case");
    }
    table.cells.assign(table.teams.size() * table.cases.size(), std::nullopt);

    auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
        return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), s) - v.begin());
    };
    std::vector<bool> seen(table.cells.size(), false);
    for (const auto& r : reports) {
        const std::size_t t = index_of(table.teams, r.team_id);
        const std::size_t c = index_of(table.cases, r.case_id);
        const std::size_t idx = t * table.cases.size() + c;
        if (seen[idx]) {
            throw Error("duplicate score row for team " + r.team_id + ", case " + r.case_id);
        }
        seen[idx] = true;
        if (r.missing) continue;
        for (double v : {r.ssim, r.psnr, r.mse}) {
            if (!std::isfinite(v)) {
                throw Error("non-finite score for team " + r.team_id + ", case " + r.case_id);
            }
        }
        table.cells[idx] = std::array<double, 3>{r.ssim, r.psnr, r.mse};
    }
    return table;
}

std::vector<double> per_case_ranks(const ScoreTable& table, Metric metric) {
    const std::size_t nteams = table.teams.size();
    const std::size_t ncases = table.cases.size();
    if (nteams == 0 || ncases == 0) throw EmptyTable("empty score table");
    const auto m = static_cast<std::size_t>(metric);

    std::vector<double> ranks(nteams * ncases, 0.0);
    for (std::size_t c = 0; c < ncases; ++c) {
        std::vector<std::size_t> scored;
        std::vector<double> values;
        for (std::size_t t = 0; t < nteams; ++t) {
            if (const auto& cell = table.cell(t, c); cell.has_value()) {
                scored.push_back(t);
                values.push_back((*cell)[m]);
            } else {
                ranks[t * ncases + c] = static_cast<double>(nteams);  // worst
            }
        }
        const std::vector<double> r = midranks(values, metric_higher_better(metric));
        for (std::size_t k = 0; k < scored.size(); ++k) ranks[scored[k] * ncases + c] = r[k];
    }
    return ranks;
}

std::vector<double> metric_rank(const ScoreTable& table, Metric metric) {
    const std::vector<double> ranks = per_case_ranks(table, metric);
    const std::size_t nteams = table.teams.size();
    const std::size_t ncases = table.cases.size();
    std::vector<double> sums(nteams, 0.0);
    for (std::size_t t = 0; t < nteams; ++t) {
        for (std::size_t c = 0; c < ncases; ++c) sums[t] += ranks[t * ncases + c];
    }
    return midranks(sums, /*higher_better=*/false);
}

Leaderboard final_ranking(const ScoreTable& table) {
    Leaderboard board;
    board.tie_break_rule = "rank_sum ascending, ties by ssim metric rank, then team_id";
    board.teams = table.teams;
    for (Metric m : kAllMetrics) {
        board.per_metric_ranks[static_cast<std::size_t>(m)] = metric_rank(table, m);
    }
    const std::size_t nteams = table.teams.size();
    board.final_rank_sum.assign(nteams, 0.0);
    for (std::size_t t = 0; t < nteams; ++t) {
        for (Metric m : kAllMetrics) {
            board.final_rank_sum[t] += board.per_metric_ranks[static_cast<std::size_t>(m)][t];
        }
    }
    std::vector<std::size_t> order(nteams);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& ssim_ranks = board.per_metric_ranks[static_cast<std::size_t>(Metric::kSsim)];
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (board.final_rank_sum[a] != board.final_rank_sum[b]) {
            return board.final_rank_sum[a] < board.final_rank_sum[b];
        }
        if (ssim_ranks[a] != ssim_ranks[b]) return ssim_ranks[a] < ssim_ranks[b];
        return table.teams[a] < table.teams[b];
    });
    board.final_order.reserve(nteams);
    for (std::size_t t : order) board.final_order.push_back(table.teams[t]);
    return board;
}

void write_leaderboard_json(const Leaderboard& board, const std::filesystem::path& path) {
    nlohmann::json j;
    j["tie_break_rule"] = board.tie_break_rule;
    for (Metric m : kAllMetrics) {
        nlohmann::json ranks;
        for (std::size_t t = 0; t < board.teams.size(); ++t) {
            ranks[board.teams[t]] = board.per_metric_ranks[static_cast<std::size_t>(m)][t];
        }
        j["per_metric_ranks"][metric_name(m)] = std::move(ranks);
    }
    nlohmann::json sums;
    for (std::size_t t = 0; t < board.teams.size(); ++t) {
        sums[board.teams[t]] = board.final_rank_sum[t];
    }
    j["final_rank_sum"] = std::move(sums);
    j["final_order"] = board.final_order;

    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoFailure("write failed: " + path.string());
}

void write_leaderboard_csv(const Leaderboard& board, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
    out << "team_id,ssim_rank,psnr_rank,mse_rank,rank_sum,final_position\n";
    for (std::size_t pos = 0; pos < board.final_order.size(); ++pos) {
        const std::string& team = board.final_order[pos];
        const std::size_t t = static_cast<std::size_t>(
            std::lower_bound(board.teams.begin(), board.teams.end(), team) - board.teams.begin());
        out << team;
        for (Metric m : kAllMetrics) {
            out << ',' << format_sig9(board.per_metric_ranks[static_cast<std::size_t>(m)][t]);
        }
        out << ',' << format_sig9(board.final_rank_sum[t]) << ',' << pos + 1 << '\n';
    }
    if (!out) throw IoFailure("write failed: " + path.string());
}

}  // namespace ipb
