#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gdpo/errors.hpp"
#include "gdpo/tool_call.hpp"

namespace gdpo {

/// Jaccard similarity of the tool-name sets, 1 when both sides are empty.
inline double name_jaccard(const std::vector<ToolCall>& predicted,
                           const std::vector<ToolCall>& ground_truth) {
    std::set<std::string> np, ng;
    for (const auto& c : predicted) np.insert(c.name);
    for (const auto& c : ground_truth) ng.insert(c.name);
    if (np.empty() && ng.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& n : ng) inter += np.count(n);
    const std::size_t uni = np.size() + ng.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Jaccard similarity of two calls' parameter-name sets, 1 when both empty.
inline double key_jaccard(const ToolCall& a, const ToolCall& b) {
    if (a.parameters.empty() && b.parameters.empty()) return 1.0;
    std::size_t inter = 0;
    for (auto it = a.parameters.begin(); it != a.parameters.end(); ++it)
        if (b.parameters.contains(it.key())) ++inter;
    const std::size_t uni = a.parameters.size() + b.parameters.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Number of ground-truth keys whose values the prediction reproduces
/// exactly (deep JSON equality; numbers compare numerically).
inline int value_matches(const ToolCall& ground_truth, const ToolCall& predicted) {
    int matches = 0;
    for (auto it = ground_truth.parameters.begin(); it != ground_truth.parameters.end(); ++it) {
        const auto pit = predicted.parameters.find(it.key());
        if (pit != predicted.parameters.end() && *pit == it.value()) ++matches;
    }
    return matches;
}

namespace detail {

/// Jonker-style Hungarian algorithm on a square cost matrix; returns the
/// column assigned to each row under the minimum-cost perfect matching.
inline std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace detail

/// Components of the optimal match between predicted and ground-truth calls.
struct MatchReport {
    double r_name = 0.0;
    double r_param = 0.0;  // sum of key Jaccards over matched pairs
    double r_value = 0.0;  // sum of exact value matches over matched pairs
    double r_max = 0.0;    // r_name + r_param + r_value
    /// Matched (ground-truth index, predicted index) pairs with a positive
    /// contribution; unmatched ground-truth calls contribute zero.
    std::vector<std::pair<std::size_t, std::size_t>> assignment;
};

/// Maximum attainable match score for a ground truth: the name term plus
/// one key-Jaccard per call plus one point per ground-truth parameter.
inline double max_match_score(const std::vector<ToolCall>& ground_truth) {
    double s = 1.0 + static_cast<double>(ground_truth.size());
    for (const auto& c : ground_truth) s += static_cast<double>(c.parameters.size());
    return s;
}

/// Finds the injective assignment of ground-truth calls to predicted calls
/// maximizing the summed pair scores (key Jaccard + value matches), and
/// returns it together with the name-matching term.
inline MatchReport optimal_match_score(const std::vector<ToolCall>& predicted,
                                       const std::vector<ToolCall>& ground_truth,
                                       std::size_t cap = 64) {
    if (predicted.size() > cap || ground_truth.size() > cap)
        throw InvalidInputError("optimal_match_score: call list exceeds cap of " +
                                std::to_string(cap));
    for (const auto& c : predicted) c.validate();
    for (const auto& c : ground_truth) c.validate();

    MatchReport report;
    report.r_name = name_jaccard(predicted, ground_truth);

    const std::size_t ng = ground_truth.size();
    const std::size_t np = predicted.size();
    if (ng > 0 && np > 0) {
        const std::size_t dim = std::max(ng, np);
        std::vector<std::vector<double>> pair_score(ng, std::vector<double>(np, 0.0));
        for (std::size_t g = 0; g < ng; ++g)
            for (std::size_t p = 0; p < np; ++p)
                pair_score[g][p] = key_jaccard(ground_truth[g], predicted[p]) +
                                   static_cast<double>(value_matches(ground_truth[g], predicted[p]));

        // Zero-padded square, maximization as negated minimization.
        std::vector<std::vector<double>> cost(dim, std::vector<double>(dim, 0.0));
        for (std::size_t g = 0; g < ng; ++g)
            for (std::size_t p = 0; p < np; ++p) cost[g][p] = -pair_score[g][p];
        const auto row_to_col = detail::hungarian_min(cost);

        for (std::size_t g = 0; g < ng; ++g) {
            const int p = row_to_col[g];
            if (p < 0 || static_cast<std::size_t>(p) >= np) continue;  // padded column
            if (pair_score[g][static_cast<std::size_t>(p)] <= 0.0) continue;  // as good as unmatched
            report.r_param += key_jaccard(ground_truth[g], predicted[static_cast<std::size_t>(p)]);
            report.r_value += value_matches(ground_truth[g], predicted[static_cast<std::size_t>(p)]);
            report.assignment.emplace_back(g, static_cast<std::size_t>(p));
        }
    }
    report.r_max = report.r_name + report.r_param + report.r_value;
    return report;
}

/// Correctness score in [-3, 3]: the affine map of the optimal match score
/// against the maximum attainable score, 6 * r_max / s_max - 3.
inline double correctness_reward(const std::vector<ToolCall>& predicted,
                                 const std::vector<ToolCall>& ground_truth,
                                 std::size_t cap = 64) {
    const auto report = optimal_match_score(predicted, ground_truth, cap);
    return 6.0 * report.r_max / max_match_score(ground_truth) - 3.0;
}

}  // namespace gdpo
