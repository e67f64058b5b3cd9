#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gdpo/errors.hpp"
#include "gdpo/stats.hpp"

namespace gdpo {

/// Per-group rewards: G rollouts x n reward dimensions.
struct RewardMatrix {
    std::string group_id;
    std::vector<std::vector<double>> values;  // G rows, each of length n
    std::vector<std::string> reward_names;    // optional; empty or length n

    std::size_t rollouts() const { return values.size(); }
    std::size_t rewards() const { return values.empty() ? 0 : values.front().size(); }

    void validate() const {
        if (values.empty()) throw InvalidInputError("RewardMatrix: no rollouts (G >= 1 required)");
        const std::size_t n = values.front().size();
        if (n == 0) throw InvalidInputError("RewardMatrix: no reward dimensions (n >= 1 required)");
        for (const auto& row : values) {
            if (row.size() != n)
                throw ShapeError("RewardMatrix: ragged rows (every rollout needs n entries)");
            if (!all_finite(row))
                throw InvalidInputError("RewardMatrix: non-finite reward entry");
        }
        if (!reward_names.empty() && reward_names.size() != n)
            throw ShapeError("RewardMatrix: reward_names length does not match n");
    }

    std::vector<double> column(std::size_t k) const {
        std::vector<double> col;
        col.reserve(values.size());
        for (const auto& row : values) col.push_back(row[k]);
        return col;
    }
};

/// Non-negative per-reward weights. An empty vector means "all 1.0".
struct WeightVector {
    std::vector<double> values;

    /// Materializes weights for n reward dimensions, validating length,
    /// finiteness, and non-negativity.
    std::vector<double> resolve(std::size_t n) const {
        if (values.empty()) return std::vector<double>(n, 1.0);
        if (values.size() != n)
            throw ShapeError("WeightVector: expected " + std::to_string(n) + " weights, got " +
                             std::to_string(values.size()));
        for (double w : values) {
            if (!std::isfinite(w)) throw InvalidInputError("WeightVector: non-finite weight");
            if (w < 0.0) throw InvalidInputError("WeightVector: negative weight");
        }
        return values;
    }
};

enum class Method { grpo, grpo_no_std, gdpo };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::grpo: return "grpo";
        case Method::grpo_no_std: return "grpo_no_std";
        case Method::gdpo: return "gdpo";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(const std::string& s) {
    if (s == "grpo") return Method::grpo;
    if (s == "grpo_no_std") return Method::grpo_no_std;
    if (s == "gdpo") return Method::gdpo;
    return std::nullopt;
}

/// Estimator selection and knobs. Zero-std groups always yield zero
/// advantages; only the batch stage carries an epsilon.
struct EstimatorConfig {
    Method method = Method::grpo;
    StdMode std_mode = StdMode::sample;
    std::optional<bool> batch_norm;  // unset: on for gdpo, off otherwise
    double batch_eps = 1e-6;
    WeightVector weights;

    bool effective_batch_norm() const { return batch_norm.value_or(method == Method::gdpo); }

    void validate() const {
        if (!(batch_eps > 0.0)) throw InvalidInputError("EstimatorConfig: batch_eps must be > 0");
    }
};

enum class Stage { pre_batch_norm, post_batch_norm };

inline const char* stage_name(Stage s) {
    return s == Stage::pre_batch_norm ? "pre_batch_norm" : "post_batch_norm";
}

struct GroupAdvantages {
    std::string group_id;
    std::vector<double> values;  // length G of the source group
};

/// Per-group advantage vectors for one optimizer step's set of groups.
struct AdvantageBatch {
    std::vector<GroupAdvantages> groups;
    Stage stage = Stage::pre_batch_norm;

    std::size_t total_rollouts() const {
        std::size_t n = 0;
        for (const auto& g : groups) n += g.values.size();
        return n;
    }
};

namespace detail {

inline void check_group_input(std::span<const double> values) {
    if (values.empty()) throw InvalidInputError("group statistics: empty rollout vector");
    if (!all_finite(values)) throw InvalidInputError("group statistics: non-finite value");
}

inline std::vector<double> weighted_row_sums(const RewardMatrix& m,
                                             std::span<const double> weights) {
    std::vector<double> sums;
    sums.reserve(m.rollouts());
    for (const auto& row : m.values) {
        CompensatedSum acc;
        for (std::size_t k = 0; k < row.size(); ++k) acc.add(weights[k] * row[k]);
        sums.push_back(acc.value());
    }
    return sums;
}

}  // namespace detail

/// (v - mean) / std within one group. A zero-spread group maps to the
/// all-zero vector instead of dividing by zero. Statistics come from a
/// sorted copy, so permuting rollouts permutes the output exactly.
inline std::vector<double> group_normalize(std::span<const double> values,
                                           StdMode std_mode = StdMode::sample) {
    detail::check_group_input(values);
    const auto [m, s] = order_independent_mean_std(values, std_mode);
    std::vector<double> out(values.size(), 0.0);
    if (s == 0.0) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - m) / s;
    return out;
}

/// v - mean within one group; the no-std variant's group stage.
inline std::vector<double> group_center(std::span<const double> values) {
    detail::check_group_input(values);
    const double m = order_independent_mean(values);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - m;
    return out;
}

/// Weighted reward sums per rollout, then group normalization of the sums.
inline std::vector<double> grpo_advantages(const RewardMatrix& m, const WeightVector& w,
                                           StdMode std_mode = StdMode::sample) {
    m.validate();
    return group_normalize(detail::weighted_row_sums(m, w.resolve(m.rewards())), std_mode);
}

/// Weighted reward sums per rollout, mean-centered without the std divisor.
inline std::vector<double> grpo_no_std_advantages(const RewardMatrix& m, const WeightVector& w) {
    m.validate();
    return group_center(detail::weighted_row_sums(m, w.resolve(m.rewards())));
}

/// Group normalization of each reward column separately, then the weighted
/// sum of the normalized columns per rollout. This is the group-stage
/// advantage, before any batch normalization.
inline std::vector<double> gdpo_group_advantages(const RewardMatrix& m, const WeightVector& w,
                                                 StdMode std_mode = StdMode::sample) {
    m.validate();
    const auto weights = w.resolve(m.rewards());
    const std::size_t g = m.rollouts();
    std::vector<CompensatedSum> acc(g);
    for (std::size_t k = 0; k < m.rewards(); ++k) {
        const auto norm = group_normalize(m.column(k), std_mode);
        for (std::size_t j = 0; j < g; ++j) acc[j].add(weights[k] * norm[j]);
    }
    std::vector<double> out(g);
    for (std::size_t j = 0; j < g; ++j) out[j] = acc[j].value();
    return out;
}

/// Per-rollout per-reward normalized advantages (G rows x n columns), the
/// pre-aggregation view used by the per-reward-tuple enumeration variant.
inline std::vector<std::vector<double>> gdpo_per_reward_advantages(
    const RewardMatrix& m, StdMode std_mode = StdMode::sample) {
    m.validate();
    const std::size_t g = m.rollouts();
    std::vector<std::vector<double>> out(g, std::vector<double>(m.rewards()));
    for (std::size_t k = 0; k < m.rewards(); ++k) {
        const auto norm = group_normalize(m.column(k), std_mode);
        for (std::size_t j = 0; j < g; ++j) out[j][k] = norm[j];
    }
    return out;
}

/// Standardizes every (group, rollout) entry over the whole batch:
/// (a - mean) / (std + eps). Requires at least two rollouts in total.
inline AdvantageBatch batch_normalize(const AdvantageBatch& batch, double eps,
                                      StdMode std_mode = StdMode::sample) {
    if (!(eps > 0.0)) throw InvalidInputError("batch_normalize: eps must be > 0");
    if (batch.stage == Stage::post_batch_norm)
        throw InvalidInputError("batch_normalize: batch is already normalized");
    if (batch.groups.empty()) throw InvalidInputError("batch_normalize: empty batch");
    std::vector<double> flat;
    flat.reserve(batch.total_rollouts());
    for (const auto& g : batch.groups) {
        if (!all_finite(g.values))
            throw InvalidInputError("batch_normalize: non-finite advantage in group '" +
                                    g.group_id + "'");
        flat.insert(flat.end(), g.values.begin(), g.values.end());
    }
    if (flat.size() < 2)
        throw InvalidInputError("batch_normalize: batch needs at least two rollouts in total");
    const auto [m, s] = order_independent_mean_std(flat, std_mode);
    const double denom = s + eps;

    AdvantageBatch out;
    out.stage = Stage::post_batch_norm;
    out.groups.reserve(batch.groups.size());
    for (const auto& g : batch.groups) {
        GroupAdvantages ga{g.group_id, {}};
        ga.values.reserve(g.values.size());
        for (double v : g.values) ga.values.push_back((v - m) / denom);
        out.groups.push_back(std::move(ga));
    }
    return out;
}

/// Group-stage advantages for one group under the configured method.
inline std::vector<double> group_stage_advantages(const RewardMatrix& m,
                                                  const EstimatorConfig& cfg) {
    switch (cfg.method) {
        case Method::grpo: return grpo_advantages(m, cfg.weights, cfg.std_mode);
        case Method::grpo_no_std: return grpo_no_std_advantages(m, cfg.weights);
        case Method::gdpo: return gdpo_group_advantages(m, cfg.weights, cfg.std_mode);
    }
    throw InvalidInputError("group_stage_advantages: unknown method");
}

/// Full pipeline over a batch of reward matrices: group stage per group,
/// then batch normalization when the config asks for it.
inline AdvantageBatch estimate(std::span<const RewardMatrix> batch, const EstimatorConfig& cfg) {
    cfg.validate();
    if (batch.empty()) throw InvalidInputError("estimate: empty batch");
    const std::size_t n = batch.front().rewards();
    AdvantageBatch out;
    out.stage = Stage::pre_batch_norm;
    out.groups.reserve(batch.size());
    for (const auto& m : batch) {
        m.validate();
        if (m.rewards() != n)
            throw ShapeError("estimate: group '" + m.group_id + "' has " +
                             std::to_string(m.rewards()) + " reward dimensions, expected " +
                             std::to_string(n));
        out.groups.push_back({m.group_id, group_stage_advantages(m, cfg)});
    }
    if (cfg.effective_batch_norm()) return batch_normalize(out, cfg.batch_eps, cfg.std_mode);
    return out;
}

}  // namespace gdpo
