#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gdpo/advantage.hpp"
#include "gdpo/errors.hpp"
#include "gdpo/signature.hpp"

namespace gdpo {

/// Exhaustive enumeration of rollout-reward combinations for (G, n, levels).
struct EnumerationSpec {
    int rollouts = 2;                          // G
    int rewards = 2;                           // n
    std::vector<std::vector<double>> levels;   // per-reward allowed values; empty -> binary
    Method method = Method::grpo;
    bool order_insensitive = true;
    int round_digits = 6;
    std::uint64_t budget = 10'000'000;
    bool per_reward_tuple = false;  // gdpo only: signature over per-reward advantage tuples

    std::vector<std::vector<double>> resolved_levels() const {
        if (levels.empty())
            return std::vector<std::vector<double>>(static_cast<std::size_t>(rewards), {0.0, 1.0});
        return levels;
    }

    void validate() const {
        if (rollouts < 2) throw InvalidInputError("EnumerationSpec: rollouts must be >= 2");
        if (rewards < 1) throw InvalidInputError("EnumerationSpec: rewards must be >= 1");
        const auto lv = resolved_levels();
        if (lv.size() != static_cast<std::size_t>(rewards))
            throw ShapeError("EnumerationSpec: need one levels list per reward");
        for (const auto& l : lv) {
            if (l.size() < 2)
                throw InvalidInputError("EnumerationSpec: each levels list needs >= 2 values");
            for (std::size_t i = 0; i < l.size(); ++i) {
                if (!std::isfinite(l[i]))
                    throw InvalidInputError("EnumerationSpec: non-finite level value");
                for (std::size_t j = i + 1; j < l.size(); ++j)
                    if (l[i] == l[j])
                        throw InvalidInputError("EnumerationSpec: duplicate level value");
            }
        }
        if (round_digits < 0 || round_digits > 12)
            throw InvalidInputError("EnumerationSpec: round_digits out of range");
        if (budget == 0) throw InvalidInputError("EnumerationSpec: budget must be positive");
    }
};

namespace detail {

constexpr std::uint64_t kCountSaturated = UINT64_MAX;

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > kCountSaturated / b) return kCountSaturated;
    return a * b;
}

/// C(n+k-1, k) with saturation, via the multiplicative formula.
inline std::uint64_t multiset_count(std::uint64_t n, std::uint64_t k) {
    // binomial(n+k-1, k)
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result = result * (n - 1 + i);
        result = result / i;
        if (result > static_cast<unsigned __int128>(kCountSaturated)) return kCountSaturated;
    }
    return static_cast<std::uint64_t>(result);
}

inline std::uint64_t power_count(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t result = 1;
    for (std::uint64_t i = 0; i < exp; ++i) result = saturating_mul(result, base);
    return result;
}

}  // namespace detail

/// Size of the per-rollout reward-vector alphabet: the product of the level
/// list sizes across rewards.
inline std::uint64_t alphabet_size(const EnumerationSpec& spec) {
    std::uint64_t v = 1;
    for (const auto& l : spec.resolved_levels())
        v = detail::saturating_mul(v, static_cast<std::uint64_t>(l.size()));
    return v;
}

/// Number of combinations the spec would enumerate (multisets or tuples).
/// Saturates at UINT64_MAX.
inline std::uint64_t combination_count(const EnumerationSpec& spec) {
    const std::uint64_t v = alphabet_size(spec);
    const auto g = static_cast<std::uint64_t>(spec.rollouts);
    return spec.order_insensitive ? detail::multiset_count(v, g) : detail::power_count(v, g);
}

inline void check_budget(const EnumerationSpec& spec) {
    const std::uint64_t count = combination_count(spec);
    if (count >= spec.budget) {
        std::ostringstream msg;
        msg << "enumeration refused: ";
        if (count == detail::kCountSaturated) {
            // Too large for exact 64-bit arithmetic; report the log-gamma estimate.
            const auto v = static_cast<double>(alphabet_size(spec));
            const auto g = static_cast<double>(spec.rollouts);
            const double log_count = spec.order_insensitive
                                         ? std::lgamma(v + g) - std::lgamma(g + 1.0) - std::lgamma(v)
                                         : g * std::log(v);
            msg << "approximately 1e" << static_cast<long long>(log_count / std::log(10.0));
        } else {
            msg << count;
        }
        msg << " combinations meet or exceed the budget of " << spec.budget;
        throw BudgetError(msg.str(), count);
    }
}

/// Visits every rollout-reward combination exactly once, as a G x n
/// RewardMatrix. Order-insensitive mode visits multisets (non-decreasing
/// alphabet index sequences); otherwise every tuple.
inline void enumerate_combinations(const EnumerationSpec& spec,
                                   const std::function<void(const RewardMatrix&)>& visit) {
    spec.validate();
    check_budget(spec);

    const auto levels = spec.resolved_levels();
    const std::uint64_t v = alphabet_size(spec);
    const auto g = static_cast<std::size_t>(spec.rollouts);
    const auto n = static_cast<std::size_t>(spec.rewards);

    // Alphabet: all per-rollout reward vectors, in lexicographic level order.
    std::vector<std::vector<double>> alphabet;
    alphabet.reserve(static_cast<std::size_t>(v));
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        std::vector<double> vec(n);
        for (std::size_t k = 0; k < n; ++k) vec[k] = levels[k][idx[k]];
        alphabet.push_back(std::move(vec));
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (++idx[k] < levels[k].size()) break;
            idx[k] = 0;
            if (k == 0) goto alphabet_done;
        }
    }
alphabet_done:

    RewardMatrix m;
    m.group_id = "enum";
    m.values.assign(g, std::vector<double>(n));

    std::vector<std::size_t> pick(g, 0);
    const std::size_t vs = alphabet.size();
    while (true) {
        for (std::size_t j = 0; j < g; ++j) m.values[j] = alphabet[pick[j]];
        visit(m);

        // Advance: non-decreasing sequences for multisets, odometer for tuples.
        std::size_t j = g;
        bool done = true;
        while (j > 0) {
            --j;
            if (pick[j] + 1 < vs) {
                ++pick[j];
                const std::size_t reset = spec.order_insensitive ? pick[j] : 0;
                for (std::size_t r = j + 1; r < g; ++r) pick[r] = reset;
                done = false;
                break;
            }
        }
        if (done) break;
    }
}

/// Advantage signature of one combination under the spec's method. Batch
/// normalization is deliberately skipped: it cannot change the number of
/// distinct groups.
inline AdvantageSignature combination_signature(const RewardMatrix& m,
                                                const EnumerationSpec& spec) {
    if (spec.per_reward_tuple && spec.method == Method::gdpo) {
        return make_row_signature(gdpo_per_reward_advantages(m), spec.round_digits,
                                  spec.order_insensitive);
    }
    EstimatorConfig cfg;
    cfg.method = spec.method;
    cfg.batch_norm = false;
    return make_signature(group_stage_advantages(m, cfg), spec.round_digits,
                          spec.order_insensitive);
}

struct DistinctGroupResult {
    std::uint64_t combinations = 0;
    std::uint64_t distinct = 0;
    /// Canonically ordered: signature -> multiplicity.
    std::map<AdvantageSignature, std::uint64_t> table;
};

/// Counts distinct advantage signatures over all enumerated combinations.
inline DistinctGroupResult count_distinct_groups(const EnumerationSpec& spec) {
    DistinctGroupResult result;
    enumerate_combinations(spec, [&](const RewardMatrix& m) {
        ++result.combinations;
        ++result.table[combination_signature(m, spec)];
    });
    result.distinct = result.table.size();
    return result;
}

/// Two reward combinations that GRPO maps to the same advantage signature
/// while GDPO keeps them apart.
struct CollapseWitness {
    std::vector<std::vector<double>> rewards_a;  // G x n
    std::vector<std::vector<double>> rewards_b;
    AdvantageSignature grpo_signature;           // shared
    AdvantageSignature gdpo_signature_a;
    AdvantageSignature gdpo_signature_b;
};

/// Finds pairs of combinations with equal GRPO signatures but different
/// GDPO signatures. `max_witnesses` = 0 returns all pairs.
inline std::vector<CollapseWitness> find_collapse_witnesses(const EnumerationSpec& spec,
                                                            std::size_t max_witnesses = 0) {
    EnumerationSpec grpo_spec = spec;
    grpo_spec.method = Method::grpo;
    grpo_spec.per_reward_tuple = false;
    EnumerationSpec gdpo_spec = spec;
    gdpo_spec.method = Method::gdpo;
    gdpo_spec.per_reward_tuple = false;

    // grpo signature -> gdpo signature -> representative combinations. With a
    // witness cap, each subclass keeps only as many members as could be paired.
    std::map<AdvantageSignature, std::map<AdvantageSignature, std::vector<std::vector<std::vector<double>>>>>
        classes;
    enumerate_combinations(grpo_spec, [&](const RewardMatrix& m) {
        const auto gs = combination_signature(m, grpo_spec);
        const auto ds = combination_signature(m, gdpo_spec);
        auto& members = classes[gs][ds];
        if (max_witnesses == 0 || members.size() < max_witnesses) members.push_back(m.values);
    });

    std::vector<CollapseWitness> witnesses;
    for (const auto& [grpo_sig, by_gdpo] : classes) {
        if (by_gdpo.size() < 2) continue;
        for (auto it_a = by_gdpo.begin(); it_a != by_gdpo.end(); ++it_a) {
            for (auto it_b = std::next(it_a); it_b != by_gdpo.end(); ++it_b) {
                for (const auto& a : it_a->second) {
                    for (const auto& b : it_b->second) {
                        witnesses.push_back(
                            {a, b, grpo_sig, it_a->first, it_b->first});
                        if (max_witnesses != 0 && witnesses.size() >= max_witnesses)
                            return witnesses;
                    }
                }
            }
        }
    }
    return witnesses;
}

struct SweepCell {
    int rollouts;
    int rewards;
    Method method;
    std::string levels_repr;
    std::optional<std::uint64_t> count;  // empty when the cell was refused
    std::uint64_t combinations;          // computed combination count
};

struct SweepResult {
    std::vector<SweepCell> rows;
    std::vector<std::string> diagnostics;
};

struct SweepSpec {
    int rollouts_from = 2;
    int rollouts_to = 8;
    int rewards_from = 2;
    int rewards_to = 2;
    std::vector<Method> methods{Method::grpo, Method::grpo_no_std, Method::gdpo};
    std::vector<double> levels{0.0, 1.0};  // shared by every reward dimension
    int round_digits = 6;
    std::uint64_t budget = 10'000'000;
};

inline std::string levels_repr(const std::vector<std::vector<double>>& levels) {
    std::ostringstream out;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (k) out << ';';
        for (std::size_t i = 0; i < levels[k].size(); ++i) {
            if (i) out << '|';
            out << levels[k][i];
        }
    }
    return out.str();
}

/// Distinct-group counts over a (G, n) grid for each method, with
/// monotonicity diagnostics over G per (method, n) and the per-n gap
/// between gdpo and grpo. Budget refusals are recorded per cell.
inline SweepResult sweep(const SweepSpec& ss) {
    if (ss.rollouts_from < 2 || ss.rollouts_to < ss.rollouts_from)
        throw InvalidInputError("sweep: invalid rollouts range");
    if (ss.rewards_from < 1 || ss.rewards_to < ss.rewards_from)
        throw InvalidInputError("sweep: invalid rewards range");
    if (ss.methods.empty()) throw InvalidInputError("sweep: no methods");

    SweepResult result;
    // (method, n) -> counts by G, for diagnostics.
    std::map<std::pair<std::string, int>, std::vector<std::optional<std::uint64_t>>> series;

    for (int n = ss.rewards_from; n <= ss.rewards_to; ++n) {
        for (int g = ss.rollouts_from; g <= ss.rollouts_to; ++g) {
            for (Method method : ss.methods) {
                EnumerationSpec spec;
                spec.rollouts = g;
                spec.rewards = n;
                spec.levels.assign(static_cast<std::size_t>(n), ss.levels);
                spec.method = method;
                spec.round_digits = ss.round_digits;
                spec.budget = ss.budget;

                SweepCell cell{g, n, method, levels_repr(spec.resolved_levels()), std::nullopt,
                               combination_count(spec)};
                try {
                    cell.count = count_distinct_groups(spec).distinct;
                } catch (const BudgetError&) {
                    // refusal recorded as an empty count
                }
                series[{method_name(method), n}].push_back(cell.count);
                result.rows.push_back(std::move(cell));
            }
        }
    }

    for (const auto& [key, counts] : series) {
        bool complete = true;
        bool non_decreasing = true;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (!counts[i]) complete = false;
            if (i > 0 && counts[i] && counts[i - 1] && *counts[i] < *counts[i - 1])
                non_decreasing = false;
        }
        std::ostringstream line;
        line << "count(" << key.first << ", n=" << key.second << ") non-decreasing in G: "
             << (non_decreasing ? "yes" : "no") << (complete ? "" : " (some cells refused)");
        result.diagnostics.push_back(line.str());
    }

    // Gap diagnostics: gdpo - grpo per n over G.
    for (int n = ss.rewards_from; n <= ss.rewards_to; ++n) {
        auto gd = series.find({"gdpo", n});
        auto gr = series.find({"grpo", n});
        if (gd == series.end() || gr == series.end()) continue;
        bool gap_non_decreasing = true;
        std::optional<std::int64_t> prev_gap;
        for (std::size_t i = 0; i < gd->second.size(); ++i) {
            if (!gd->second[i] || !gr->second[i]) continue;
            const auto gap = static_cast<std::int64_t>(*gd->second[i]) -
                             static_cast<std::int64_t>(*gr->second[i]);
            if (prev_gap && gap < *prev_gap) gap_non_decreasing = false;
            prev_gap = gap;
        }
        std::ostringstream line;
        line << "gap gdpo-grpo (n=" << n << ") non-decreasing in G: "
             << (gap_non_decreasing ? "yes" : "no");
        result.diagnostics.push_back(line.str());
    }
    return result;
}

}  // namespace gdpo
