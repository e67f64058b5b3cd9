#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "gdpo/advantage.hpp"
#include "gdpo/errors.hpp"
#include "gdpo/rng.hpp"
#include "gdpo/shaping.hpp"

namespace gdpo {

/// One synthetic question: a discrete action set with a per-action reward
/// vector. With `bernoulli` set, table entries are success probabilities
/// sampled per rollout instead of deterministic rewards.
struct QuestionSpec {
    int actions = 2;
    std::vector<std::vector<double>> reward_table;  // actions x n, entries in [0,1]
    bool bernoulli = false;
};

struct ScenarioSpec {
    std::string preset = "custom";
    int reward_dims = 1;
    std::vector<QuestionSpec> questions;
    std::vector<ConditionSpec> conditions;
    WeightVector weights;

    void validate() const {
        if (questions.empty()) throw InvalidInputError("ScenarioSpec: no questions");
        if (reward_dims < 1) throw InvalidInputError("ScenarioSpec: reward_dims must be >= 1");
        for (const auto& q : questions) {
            if (q.actions < 2) throw InvalidInputError("ScenarioSpec: every question needs >= 2 actions");
            if (q.reward_table.size() != static_cast<std::size_t>(q.actions))
                throw ShapeError("ScenarioSpec: reward table rows must match action count");
            for (const auto& row : q.reward_table) {
                if (row.size() != static_cast<std::size_t>(reward_dims))
                    throw ShapeError("ScenarioSpec: reward table columns must match reward_dims");
                for (double v : row) {
                    if (!std::isfinite(v)) throw InvalidInputError("ScenarioSpec: non-finite reward");
                    if (v < 0.0 || v > 1.0)
                        throw InvalidInputError("ScenarioSpec: reward entries must lie in [0,1]");
                }
            }
        }
        for (const auto& c : conditions) c.validate(static_cast<std::size_t>(reward_dims));
        weights.resolve(static_cast<std::size_t>(reward_dims));
    }
};

/// Knobs for the built-in presets. Counts are derived from the fractions
/// and rounded, with at least one satisfying action per reward.
struct PresetParams {
    int questions = 8;
    int actions = 10;
    double hard_fraction = 0.2;   // competing: share of actions with reward 0 set
    double easy_fraction = 0.8;   // competing: share of actions with reward 1 set
    int overlap = 1;              // competing: actions satisfying both
    int base_count = 2;           // easy-vs-hard: actions satisfying reward 0
    int gap = 0;                  // easy-vs-hard: extra actions satisfying reward 1
};

namespace detail {

inline std::vector<int> shuffled_actions(int actions, RngStream& rng) {
    std::vector<int> order(static_cast<std::size_t>(actions));
    std::iota(order.begin(), order.end(), 0);
    for (int i = actions - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return order;
}

}  // namespace detail

/// Two rewards that pull in different directions: reward 0 ("hard") is
/// satisfied on few actions, reward 1 ("easy") on most, and the actions
/// satisfying both are rare but guaranteed to exist.
inline ScenarioSpec build_competing(const PresetParams& p, std::uint64_t seed) {
    if (p.questions < 1) throw InvalidInputError("competing preset: needs >= 1 question");
    if (p.actions < 2) throw InvalidInputError("competing preset: needs >= 2 actions");
    const int hard = std::max(1, static_cast<int>(std::lround(p.hard_fraction * p.actions)));
    const int easy = std::max(1, static_cast<int>(std::lround(p.easy_fraction * p.actions)));
    const int overlap = std::clamp(p.overlap, 1, std::min(hard, easy));
    if (hard + easy - overlap > p.actions)
        throw InvalidInputError("competing preset: hard + easy - overlap exceeds action count");

    ScenarioSpec s;
    s.preset = "competing";
    s.reward_dims = 2;
    for (int q = 0; q < p.questions; ++q) {
        RngStream rng = RngStream::derive(seed, 0x5CE11A10, static_cast<std::uint64_t>(q));
        const auto order = detail::shuffled_actions(p.actions, rng);
        QuestionSpec question;
        question.actions = p.actions;
        question.reward_table.assign(static_cast<std::size_t>(p.actions), {0.0, 0.0});
        int pos = 0;
        for (int i = 0; i < overlap; ++i, ++pos)
            question.reward_table[static_cast<std::size_t>(order[pos])] = {1.0, 1.0};
        for (int i = 0; i < hard - overlap; ++i, ++pos)
            question.reward_table[static_cast<std::size_t>(order[pos])] = {1.0, 0.0};
        for (int i = 0; i < easy - overlap; ++i, ++pos)
            question.reward_table[static_cast<std::size_t>(order[pos])] = {0.0, 1.0};
        s.questions.push_back(std::move(question));
    }
    s.validate();
    return s;
}

/// Two rewards of configurable difficulty gap: reward 0 is satisfied on
/// `base_count` actions, reward 1 on `base_count + gap`.
inline ScenarioSpec build_easy_vs_hard(const PresetParams& p, std::uint64_t seed) {
    if (p.questions < 1) throw InvalidInputError("easy-vs-hard preset: needs >= 1 question");
    if (p.actions < 2) throw InvalidInputError("easy-vs-hard preset: needs >= 2 actions");
    const int hard = std::clamp(p.base_count, 1, p.actions);
    const int easy = std::clamp(p.base_count + p.gap, 1, p.actions);

    ScenarioSpec s;
    s.preset = "easy-vs-hard";
    s.reward_dims = 2;
    for (int q = 0; q < p.questions; ++q) {
        RngStream rng = RngStream::derive(seed, 0xEA57, static_cast<std::uint64_t>(q));
        QuestionSpec question;
        question.actions = p.actions;
        question.reward_table.assign(static_cast<std::size_t>(p.actions), {0.0, 0.0});
        const auto hard_order = detail::shuffled_actions(p.actions, rng);
        for (int i = 0; i < hard; ++i)
            question.reward_table[static_cast<std::size_t>(hard_order[i])][0] = 1.0;
        const auto easy_order = detail::shuffled_actions(p.actions, rng);
        for (int i = 0; i < easy; ++i)
            question.reward_table[static_cast<std::size_t>(easy_order[i])][1] = 1.0;
        s.questions.push_back(std::move(question));
    }
    s.validate();
    return s;
}

/// Preset dispatcher. Custom scenarios come from files, not from here.
inline ScenarioSpec build_scenario(const std::string& preset, const PresetParams& params,
                                   std::uint64_t seed) {
    if (preset == "competing") return build_competing(params, seed);
    if (preset == "easy-vs-hard") return build_easy_vs_hard(params, seed);
    if (preset == "custom")
        throw InvalidInputError("build_scenario: custom scenarios are loaded from a file");
    throw InvalidInputError("build_scenario: unknown preset '" + preset + "'");
}

}  // namespace gdpo
