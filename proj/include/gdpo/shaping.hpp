#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gdpo/advantage.hpp"
#include "gdpo/errors.hpp"

namespace gdpo {

/// Gates reward `gated` on reward `gate` meeting `threshold`.
struct ConditionSpec {
    std::size_t gated;   // index k: zeroed unless the gate holds
    std::size_t gate;    // index l: compared against the threshold
    double threshold;    // t: gate holds iff reward[gate] >= t

    void validate(std::size_t n) const {
        if (gated >= n || gate >= n)
            throw InvalidInputError("ConditionSpec: reward index out of range");
        if (gated == gate) throw InvalidInputError("ConditionSpec: gated index equals gate index");
        if (!std::isfinite(threshold)) throw InvalidInputError("ConditionSpec: non-finite threshold");
    }
};

/// 1 iff the response stayed within the target length (inclusive).
inline double length_reward(std::size_t length, std::size_t target) {
    if (target == 0) throw InvalidInputError("length_reward: target must be positive");
    return length <= target ? 1.0 : 0.0;
}

/// Zeroes entry `gated` when entry `gate` falls below the threshold.
inline std::vector<double> condition_reward(std::vector<double> rewards,
                                            const ConditionSpec& spec) {
    spec.validate(rewards.size());
    if (rewards[spec.gate] < spec.threshold) rewards[spec.gated] = 0.0;
    return rewards;
}

/// A reward row ready for the estimator: conditions already applied, the
/// weights carried alongside but deliberately not multiplied in. GRPO
/// weights raw rewards and GDPO weights normalized advantages, so the
/// application point belongs to the estimator.
struct WeightedRow {
    std::vector<double> values;
    WeightVector weights;
};

inline WeightedRow combine(std::vector<double> rewards, WeightVector weights,
                           const std::vector<ConditionSpec>& conditions) {
    if (!all_finite(rewards)) throw InvalidInputError("combine: non-finite reward");
    weights.resolve(rewards.size());  // shape + range check only
    for (const auto& c : conditions) rewards = condition_reward(std::move(rewards), c);
    return WeightedRow{std::move(rewards), std::move(weights)};
}

/// Fraction of passed test cases, the externally supplied pass-rate signal.
inline double pass_rate_reward(std::size_t passed, std::size_t total) {
    if (total == 0) throw InvalidInputError("pass_rate_reward: no test cases");
    if (passed > total) throw InvalidInputError("pass_rate_reward: passed exceeds total");
    return static_cast<double>(passed) / static_cast<double>(total);
}

/// Validates an externally supplied pass-rate signal (range [0, 1]).
inline double validate_pass_rate(double value) {
    if (!std::isfinite(value) || value < 0.0 || value > 1.0)
        throw InvalidInputError("pass rate signal outside [0, 1]");
    return value;
}

/// Validates an externally supplied bug signal (exactly 0 or 1).
inline double validate_bug_flag(double value) {
    if (value != 0.0 && value != 1.0)
        throw InvalidInputError("bug signal must be 0 or 1");
    return value;
}

}  // namespace gdpo
