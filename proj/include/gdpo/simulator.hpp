#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gdpo/advantage.hpp"
#include "gdpo/errors.hpp"
#include "gdpo/rng.hpp"
#include "gdpo/scenario.hpp"
#include "gdpo/signature.hpp"

namespace gdpo {

/// Tabular softmax policy: one logit vector per question.
struct Policy {
    std::vector<std::vector<double>> logits;

    static Policy uniform(const ScenarioSpec& scenario) {
        Policy p;
        p.logits.reserve(scenario.questions.size());
        for (const auto& q : scenario.questions)
            p.logits.emplace_back(static_cast<std::size_t>(q.actions), 0.0);
        return p;
    }

    std::vector<double> probabilities(std::size_t question) const {
        return softmax(logits[question]);
    }

    static std::vector<double> softmax(const std::vector<double>& logits) {
        const double max_logit = *std::max_element(logits.begin(), logits.end());
        std::vector<double> p(logits.size());
        double z = 0.0;
        for (std::size_t a = 0; a < logits.size(); ++a) {
            p[a] = std::exp(logits[a] - max_logit);
            z += p[a];
        }
        for (auto& v : p) v /= z;
        return p;
    }

    double entropy(std::size_t question) const {
        double h = 0.0;
        for (double p : probabilities(question))
            if (p > 0.0) h -= p * std::log(p);
        return h;
    }

    double mean_entropy() const {
        double h = 0.0;
        for (std::size_t q = 0; q < logits.size(); ++q) h += entropy(q);
        return h / static_cast<double>(logits.size());
    }
};

struct Rollout {
    int action = 0;
    double logprob_old = 0.0;           // log pi_old(action)
    std::vector<double> rewards;        // post-conditioning, length n
};

struct GroupSample {
    std::size_t question = 0;
    std::vector<Rollout> rollouts;
};

/// Training knobs. Clip thresholds are asymmetric; the defaults follow the
/// usual group-sampling recipe (16 rollouts, 0.2/0.28 clipping, one epoch).
struct TrainConfig {
    int rollouts = 16;                  // G
    int batch_questions = 8;
    int steps = 100;
    double learning_rate = 0.1;
    double clip_low = 0.2;
    double clip_high = 0.28;
    int ppo_epochs = 1;
    bool dynamic_filter = true;
    EstimatorConfig estimator;
    std::uint64_t seed = 0;
    double kl_coef = 0.0;               // quadratic penalty on logit drift

    void validate() const {
        if (rollouts < 2) throw InvalidInputError("TrainConfig: rollouts must be >= 2");
        if (batch_questions < 1) throw InvalidInputError("TrainConfig: batch_questions must be >= 1");
        if (steps < 0) throw InvalidInputError("TrainConfig: negative step count");
        if (!(clip_low > 0.0 && clip_low < 1.0))
            throw InvalidInputError("TrainConfig: clip_low outside (0,1)");
        if (!(clip_high > 0.0 && clip_high < 1.0))
            throw InvalidInputError("TrainConfig: clip_high outside (0,1)");
        if (ppo_epochs < 1) throw InvalidInputError("TrainConfig: ppo_epochs must be >= 1");
        if (!std::isfinite(learning_rate)) throw InvalidInputError("TrainConfig: bad learning rate");
        if (kl_coef < 0.0) throw InvalidInputError("TrainConfig: negative kl_coef");
        estimator.validate();
    }
};

/// Samples G rollouts for one question from the snapshot policy, reading
/// rewards from the scenario table and applying its conditions.
inline GroupSample sample_group(const Policy& snapshot, const ScenarioSpec& scenario,
                                std::size_t question, int rollouts, RngStream& rng) {
    const auto& q = scenario.questions[question];
    const auto probs = snapshot.probabilities(question);

    GroupSample group;
    group.question = question;
    group.rollouts.reserve(static_cast<std::size_t>(rollouts));
    for (int j = 0; j < rollouts; ++j) {
        const double u = rng.next_double();
        int action = 0;
        double cdf = 0.0;
        for (std::size_t a = 0; a < probs.size(); ++a) {
            cdf += probs[a];
            if (u < cdf) {
                action = static_cast<int>(a);
                break;
            }
            action = static_cast<int>(a);  // guard against cdf rounding at 1.0
        }
        Rollout r;
        r.action = action;
        r.logprob_old = std::log(probs[static_cast<std::size_t>(action)]);
        r.rewards = q.reward_table[static_cast<std::size_t>(action)];
        if (q.bernoulli)
            for (auto& v : r.rewards) v = rng.next_double() < v ? 1.0 : 0.0;
        for (const auto& c : scenario.conditions) r.rewards = condition_reward(std::move(r.rewards), c);
        group.rollouts.push_back(std::move(r));
    }
    return group;
}

/// Drops groups whose weighted total rewards carry zero advantage spread
/// (all rollouts equal). Returns the retained groups in input order.
inline std::vector<GroupSample> dynamic_filter(std::vector<GroupSample> groups,
                                               std::span<const double> weights) {
    std::vector<GroupSample> retained;
    retained.reserve(groups.size());
    for (auto& g : groups) {
        bool spread = false;
        double first = 0.0;
        for (std::size_t j = 0; j < g.rollouts.size(); ++j) {
            double total = 0.0;
            for (std::size_t k = 0; k < weights.size(); ++k)
                total += weights[k] * g.rollouts[j].rewards[k];
            if (j == 0)
                first = total;
            else if (total != first)
                spread = true;
        }
        if (spread) retained.push_back(std::move(g));
    }
    return retained;
}

/// Mean over the group of min(s*A, clip(s, 1-clip_low, 1+clip_high)*A),
/// minus the optional quadratic drift penalty toward the snapshot logits.
inline double clipped_surrogate(const std::vector<double>& logits,
                                const std::vector<double>& snapshot_logits,
                                const GroupSample& group, std::span<const double> advantages,
                                const TrainConfig& cfg) {
    const auto probs = Policy::softmax(logits);
    double total = 0.0;
    for (std::size_t j = 0; j < group.rollouts.size(); ++j) {
        const auto& r = group.rollouts[j];
        const double s = std::exp(std::log(probs[static_cast<std::size_t>(r.action)]) - r.logprob_old);
        const double clipped = std::clamp(s, 1.0 - cfg.clip_low, 1.0 + cfg.clip_high);
        total += std::min(s * advantages[j], clipped * advantages[j]);
    }
    double objective = total / static_cast<double>(group.rollouts.size());
    if (cfg.kl_coef > 0.0) {
        double drift = 0.0;
        for (std::size_t a = 0; a < logits.size(); ++a) {
            const double d = logits[a] - snapshot_logits[a];
            drift += d * d;
        }
        objective -= 0.5 * cfg.kl_coef * drift;
    }
    return objective;
}

/// Analytic logit gradient of `clipped_surrogate`. When the clipped arm is
/// strictly active the ratio sits outside the clip band, so its gradient
/// contribution vanishes; ties fall to the unclipped arm.
inline std::vector<double> surrogate_gradient(const std::vector<double>& logits,
                                              const std::vector<double>& snapshot_logits,
                                              const GroupSample& group,
                                              std::span<const double> advantages,
                                              const TrainConfig& cfg) {
    const auto probs = Policy::softmax(logits);
    std::vector<double> grad(logits.size(), 0.0);
    const double inv_g = 1.0 / static_cast<double>(group.rollouts.size());
    for (std::size_t j = 0; j < group.rollouts.size(); ++j) {
        const auto& r = group.rollouts[j];
        const double a_j = advantages[j];
        const double s = std::exp(std::log(probs[static_cast<std::size_t>(r.action)]) - r.logprob_old);
        const double clipped = std::clamp(s, 1.0 - cfg.clip_low, 1.0 + cfg.clip_high);
        if (s * a_j > clipped * a_j) continue;  // clipped arm active, flat in theta
        // d(s A)/d logit_b = s A (1[b = action] - p_b)
        const double coeff = inv_g * a_j * s;
        for (std::size_t b = 0; b < grad.size(); ++b) {
            const double indicator = (static_cast<int>(b) == r.action) ? 1.0 : 0.0;
            grad[b] += coeff * (indicator - probs[b]);
        }
    }
    if (cfg.kl_coef > 0.0)
        for (std::size_t b = 0; b < grad.size(); ++b)
            grad[b] -= cfg.kl_coef * (logits[b] - snapshot_logits[b]);
    return grad;
}

/// One optimizer step: ascends the clipped surrogate on every question that
/// has a group, `ppo_epochs` passes over the fixed snapshot samples.
inline void policy_update(Policy& policy, const Policy& snapshot,
                          const std::vector<GroupSample>& groups,
                          const AdvantageBatch& advantages, const TrainConfig& cfg) {
    if (groups.size() != advantages.groups.size())
        throw ShapeError("policy_update: advantage batch does not match group count");
    for (std::size_t i = 0; i < groups.size(); ++i)
        if (groups[i].rollouts.size() != advantages.groups[i].values.size())
            throw ShapeError("policy_update: advantage vector does not match rollout count");

    for (int epoch = 0; epoch < cfg.ppo_epochs; ++epoch) {
        // Accumulate gradients per question, then step once per question.
        std::vector<std::vector<double>> grads(policy.logits.size());
        for (std::size_t i = 0; i < groups.size(); ++i) {
            const std::size_t q = groups[i].question;
            auto g = surrogate_gradient(policy.logits[q], snapshot.logits[q], groups[i],
                                        advantages.groups[i].values, cfg);
            if (!all_finite(g))
                throw SimulationError("policy_update: non-finite gradient on question " +
                                      std::to_string(q));
            if (grads[q].empty())
                grads[q] = std::move(g);
            else
                for (std::size_t b = 0; b < g.size(); ++b) grads[q][b] += g[b];
        }
        for (std::size_t q = 0; q < grads.size(); ++q) {
            if (grads[q].empty()) continue;
            for (std::size_t b = 0; b < grads[q].size(); ++b)
                policy.logits[q][b] += cfg.learning_rate * grads[q][b];
        }
    }
}

struct StepMetrics {
    int step = 0;
    std::vector<double> mean_reward;  // per reward dimension, over all sampled rollouts
    double mean_total = 0.0;          // weighted total per rollout, averaged
    double groups_filtered = 0.0;     // fraction of sampled groups dropped
    std::uint64_t distinct_signatures = 0;
    double entropy = 0.0;             // mean policy entropy at sampling time
};

struct MetricsLog {
    std::string method;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<StepMetrics> steps;
};

namespace detail {

inline std::string hash_config(const ScenarioSpec& scenario, const TrainConfig& cfg) {
    std::ostringstream blob;
    blob << scenario.preset << '|' << scenario.reward_dims << '|' << scenario.questions.size();
    for (const auto& q : scenario.questions) {
        blob << '|' << q.actions << (q.bernoulli ? 'b' : 'd');
        for (const auto& row : q.reward_table)
            for (double v : row) blob << ',' << v;
    }
    for (const auto& c : scenario.conditions)
        blob << "|c" << c.gated << ',' << c.gate << ',' << c.threshold;
    blob << '|' << method_name(cfg.estimator.method) << '|' << cfg.rollouts << '|'
         << cfg.batch_questions << '|' << cfg.steps << '|' << cfg.learning_rate << '|'
         << cfg.clip_low << '|' << cfg.clip_high << '|' << cfg.ppo_epochs << '|'
         << cfg.dynamic_filter << '|' << cfg.estimator.effective_batch_norm() << '|'
         << cfg.estimator.batch_eps << '|'
         << (cfg.estimator.std_mode == StdMode::sample ? "sample" : "population") << '|'
         << cfg.kl_coef;
    for (double w : cfg.estimator.weights.values) blob << ",w" << w;
    for (double w : scenario.weights.values) blob << ",sw" << w;

    const std::string s = blob.str();
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

inline std::vector<std::size_t> select_questions(std::size_t total, int batch_questions,
                                                 std::uint64_t seed, int step) {
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    if (static_cast<std::size_t>(batch_questions) >= total) return order;
    RngStream rng = RngStream::derive(seed, 0x9E1EC7, static_cast<std::uint64_t>(step));
    for (std::size_t i = 0; i < static_cast<std::size_t>(batch_questions); ++i) {
        const std::size_t j = i + rng.next_below(total - i);
        std::swap(order[i], order[j]);
    }
    order.resize(static_cast<std::size_t>(batch_questions));
    std::sort(order.begin(), order.end());
    return order;
}

}  // namespace detail

/// Optional per-step hook: receives the surviving groups' reward matrices
/// before advantage estimation.
using StepObserver =
    std::function<void(int step, const std::vector<RewardMatrix>& surviving_groups)>;

/// Runs the full loop: snapshot, sample, filter, estimate, update, log.
/// Deterministic in (scenario, config, seed); per-question sampling streams
/// are keyed by (seed, step, question) so scheduling cannot reorder them.
inline MetricsLog run_experiment(const ScenarioSpec& scenario, const TrainConfig& cfg,
                                 const StepObserver& observer = {}) {
    scenario.validate();
    cfg.validate();
    const auto n = static_cast<std::size_t>(scenario.reward_dims);
    // Estimator weights take precedence; otherwise the scenario's.
    const WeightVector& weight_source =
        cfg.estimator.weights.values.empty() ? scenario.weights : cfg.estimator.weights;
    const auto weights = weight_source.resolve(n);
    EstimatorConfig estimator = cfg.estimator;
    estimator.weights.values = weights;

    MetricsLog log;
    log.method = method_name(cfg.estimator.method);
    log.seed = cfg.seed;
    log.config_hash = detail::hash_config(scenario, cfg);

    Policy policy = Policy::uniform(scenario);
    for (int step = 0; step < cfg.steps; ++step) {
        const Policy snapshot = policy;

        const auto question_ids =
            detail::select_questions(scenario.questions.size(), cfg.batch_questions, cfg.seed, step);
        std::vector<GroupSample> groups;
        groups.reserve(question_ids.size());
        for (const auto q : question_ids) {
            RngStream rng = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(step) + 1,
                                              static_cast<std::uint64_t>(q));
            groups.push_back(sample_group(snapshot, scenario, q, cfg.rollouts, rng));
        }

        StepMetrics metrics;
        metrics.step = step;
        metrics.entropy = snapshot.mean_entropy();
        metrics.mean_reward.assign(n, 0.0);
        std::size_t rollout_count = 0;
        for (const auto& g : groups) {
            for (const auto& r : g.rollouts) {
                ++rollout_count;
                double total = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    metrics.mean_reward[k] += r.rewards[k];
                    total += weights[k] * r.rewards[k];
                }
                metrics.mean_total += total;
            }
        }
        for (auto& v : metrics.mean_reward) v /= static_cast<double>(rollout_count);
        metrics.mean_total /= static_cast<double>(rollout_count);

        const std::size_t sampled_groups = groups.size();
        if (cfg.dynamic_filter) groups = dynamic_filter(std::move(groups), weights);
        metrics.groups_filtered =
            static_cast<double>(sampled_groups - groups.size()) / static_cast<double>(sampled_groups);

        if (!groups.empty()) {
            std::vector<RewardMatrix> matrices;
            matrices.reserve(groups.size());
            for (const auto& g : groups) {
                RewardMatrix m;
                m.group_id = "q" + std::to_string(g.question);
                for (const auto& r : g.rollouts) m.values.push_back(r.rewards);
                matrices.push_back(std::move(m));
            }
            if (observer) observer(step, matrices);

            // Group stage first: the signature metric reads it, then the
            // batch stage runs when configured.
            AdvantageBatch batch;
            batch.stage = Stage::pre_batch_norm;
            std::set<AdvantageSignature> signatures;
            for (const auto& m : matrices) {
                auto adv = group_stage_advantages(m, estimator);
                signatures.insert(make_signature(adv));
                batch.groups.push_back({m.group_id, std::move(adv)});
            }
            metrics.distinct_signatures = signatures.size();
            if (estimator.effective_batch_norm())
                batch = batch_normalize(batch, estimator.batch_eps, estimator.std_mode);

            policy_update(policy, snapshot, groups, batch, cfg);
        } else if (observer) {
            observer(step, {});
        }
        log.steps.push_back(std::move(metrics));
    }
    return log;
}

struct MethodRuns {
    std::string method;
    std::vector<MetricsLog> runs;  // one per seed, in seed order
};

struct SummaryRow {
    int step;
    std::string method;
    double median_total;
    double iqr_lo;  // 25th percentile
    double iqr_hi;  // 75th percentile
};

struct ComparisonResult {
    std::vector<MethodRuns> methods;
    std::vector<SummaryRow> summary;  // ordered by (method insertion order, step)
};

/// Runs each config over the seed list and summarizes the per-step weighted
/// total reward with the median and interquartile range across seeds.
inline ComparisonResult compare_methods(const ScenarioSpec& scenario,
                                        const std::vector<TrainConfig>& configs,
                                        const std::vector<std::uint64_t>& seeds,
                                        const StepObserver& observer = {}) {
    if (configs.empty()) throw InvalidInputError("compare_methods: no configs");
    if (seeds.empty()) throw InvalidInputError("compare_methods: no seeds");

    ComparisonResult result;
    for (const auto& base_cfg : configs) {
        MethodRuns runs;
        runs.method = method_name(base_cfg.estimator.method);
        for (const auto seed : seeds) {
            TrainConfig cfg = base_cfg;
            cfg.seed = seed;
            runs.runs.push_back(run_experiment(scenario, cfg, observer));
        }
        result.methods.push_back(std::move(runs));
    }
    for (const auto& runs : result.methods) {
        const int steps = runs.runs.empty() ? 0 : static_cast<int>(runs.runs.front().steps.size());
        for (int t = 0; t < steps; ++t) {
            std::vector<double> totals;
            totals.reserve(runs.runs.size());
            for (const auto& run : runs.runs)
                totals.push_back(run.steps[static_cast<std::size_t>(t)].mean_total);
            result.summary.push_back({t, runs.method, median(totals), quantile(totals, 0.25),
                                      quantile(totals, 0.75)});
        }
    }
    return result;
}

}  // namespace gdpo
