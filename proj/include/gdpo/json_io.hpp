#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gdpo/advantage.hpp"
#include "gdpo/enumeration.hpp"
#include "gdpo/errors.hpp"
#include "gdpo/matching.hpp"
#include "gdpo/scenario.hpp"
#include "gdpo/shaping.hpp"
#include "gdpo/tool_call.hpp"

namespace gdpo::io {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw SchemaError(path, what);
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) known = true;
        if (!known) fail(path + "." + it.key(), "unknown key");
    }
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) fail(path, std::string("missing required key '") + key + "'");
    return obj.at(key);
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

inline std::size_t as_index(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail(path, "expected a non-negative integer");
    return v.get<std::size_t>();
}

}  // namespace detail

inline json parse_text(const std::string& text) {
    const auto parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) detail::fail("$", "not valid JSON");
    return parsed;
}

// ---------------------------------------------------------------------------
// RewardMatrix batches
// ---------------------------------------------------------------------------

inline RewardMatrix parse_reward_matrix(const json& obj, const std::string& path) {
    if (!obj.is_object()) detail::fail(path, "expected an object");
    detail::reject_unknown_keys(obj, {"group_id", "rewards", "reward_names"}, path);

    RewardMatrix m;
    m.group_id = detail::as_string(detail::require(obj, "group_id", path), path + ".group_id");

    const auto& rewards = detail::require(obj, "rewards", path);
    if (!rewards.is_array() || rewards.empty())
        detail::fail(path + ".rewards", "expected a non-empty array of rows");
    for (std::size_t j = 0; j < rewards.size(); ++j) {
        const auto row_path = path + ".rewards[" + std::to_string(j) + "]";
        const auto& row = rewards[j];
        if (!row.is_array() || row.empty())
            detail::fail(row_path, "expected a non-empty array of numbers");
        std::vector<double> values;
        values.reserve(row.size());
        for (std::size_t k = 0; k < row.size(); ++k)
            values.push_back(detail::as_number(row[k], row_path + "[" + std::to_string(k) + "]"));
        m.values.push_back(std::move(values));
    }

    if (obj.contains("reward_names")) {
        const auto& names = obj.at("reward_names");
        if (!names.is_array()) detail::fail(path + ".reward_names", "expected an array of strings");
        for (std::size_t k = 0; k < names.size(); ++k)
            m.reward_names.push_back(
                detail::as_string(names[k], path + ".reward_names[" + std::to_string(k) + "]"));
    }

    try {
        m.validate();
    } catch (const Error& e) {
        detail::fail(path, e.what());
    }
    return m;
}

/// Accepts either a single RewardMatrix object or an array of them.
inline std::vector<RewardMatrix> parse_reward_batch(const json& root) {
    std::vector<RewardMatrix> batch;
    if (root.is_object()) {
        batch.push_back(parse_reward_matrix(root, "$"));
    } else if (root.is_array()) {
        if (root.empty()) detail::fail("$", "empty batch");
        for (std::size_t i = 0; i < root.size(); ++i)
            batch.push_back(parse_reward_matrix(root[i], "$[" + std::to_string(i) + "]"));
    } else {
        detail::fail("$", "expected an object or an array of objects");
    }
    return batch;
}

inline json advantage_batch_to_json(const AdvantageBatch& batch) {
    json out = json::array();
    for (const auto& g : batch.groups) {
        json group;
        group["group_id"] = g.group_id;
        group["advantages"] = g.values;
        group["stage"] = stage_name(batch.stage);
        out.push_back(std::move(group));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tool-call files and the scorer report
// ---------------------------------------------------------------------------

inline std::vector<ToolCall> parse_tool_call_file(const json& root) {
    if (!root.is_array()) detail::fail("$", "expected an array of tool calls");
    std::vector<ToolCall> calls;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const auto path = "$[" + std::to_string(i) + "]";
        const auto& obj = root[i];
        if (!obj.is_object()) detail::fail(path, "expected an object");
        detail::reject_unknown_keys(obj, {"name", "parameters"}, path);
        ToolCall call;
        call.name = detail::as_string(detail::require(obj, "name", path), path + ".name");
        const auto& params = detail::require(obj, "parameters", path);
        if (!params.is_object()) detail::fail(path + ".parameters", "expected an object");
        call.parameters = params;
        try {
            call.validate();
        } catch (const Error& e) {
            detail::fail(path, e.what());
        }
        calls.push_back(std::move(call));
    }
    return calls;
}

inline json score_report_to_json(int format, double correctness, const MatchReport& report) {
    json out;
    out["format"] = format;
    out["correctness"] = correctness;
    out["r_name"] = report.r_name;
    out["r_param"] = report.r_param;
    out["r_value"] = report.r_value;
    json assignment = json::array();
    for (const auto& [g, p] : report.assignment) assignment.push_back(json::array({g, p}));
    out["assignment"] = std::move(assignment);
    return out;
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

inline ScenarioSpec parse_scenario(const json& root) {
    if (!root.is_object()) detail::fail("$", "expected a scenario object");
    detail::reject_unknown_keys(root, {"preset", "reward_dims", "questions", "conditions", "weights"},
                                "$");

    ScenarioSpec s;
    if (root.contains("preset")) s.preset = detail::as_string(root.at("preset"), "$.preset");
    s.reward_dims =
        static_cast<int>(detail::as_index(detail::require(root, "reward_dims", "$"), "$.reward_dims"));

    const auto& questions = detail::require(root, "questions", "$");
    if (!questions.is_array() || questions.empty())
        detail::fail("$.questions", "expected a non-empty array");
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto path = "$.questions[" + std::to_string(i) + "]";
        const auto& q = questions[i];
        if (!q.is_object()) detail::fail(path, "expected an object");
        detail::reject_unknown_keys(q, {"actions", "rewards", "bernoulli"}, path);
        QuestionSpec question;
        question.actions =
            static_cast<int>(detail::as_index(detail::require(q, "actions", path), path + ".actions"));
        const auto& table = detail::require(q, "rewards", path);
        if (!table.is_array()) detail::fail(path + ".rewards", "expected an array of rows");
        for (std::size_t a = 0; a < table.size(); ++a) {
            const auto row_path = path + ".rewards[" + std::to_string(a) + "]";
            const auto& row = table[a];
            if (!row.is_array()) detail::fail(row_path, "expected an array of numbers");
            std::vector<double> values;
            for (std::size_t k = 0; k < row.size(); ++k)
                values.push_back(detail::as_number(row[k], row_path + "[" + std::to_string(k) + "]"));
            question.reward_table.push_back(std::move(values));
        }
        if (q.contains("bernoulli")) {
            if (!q.at("bernoulli").is_boolean()) detail::fail(path + ".bernoulli", "expected a boolean");
            question.bernoulli = q.at("bernoulli").get<bool>();
        }
        s.questions.push_back(std::move(question));
    }

    if (root.contains("conditions")) {
        const auto& conditions = root.at("conditions");
        if (!conditions.is_array()) detail::fail("$.conditions", "expected an array");
        for (std::size_t i = 0; i < conditions.size(); ++i) {
            const auto path = "$.conditions[" + std::to_string(i) + "]";
            const auto& c = conditions[i];
            if (!c.is_object()) detail::fail(path, "expected an object");
            detail::reject_unknown_keys(c, {"gated", "gate", "threshold"}, path);
            s.conditions.push_back(
                {detail::as_index(detail::require(c, "gated", path), path + ".gated"),
                 detail::as_index(detail::require(c, "gate", path), path + ".gate"),
                 detail::as_number(detail::require(c, "threshold", path), path + ".threshold")});
        }
    }

    if (root.contains("weights")) {
        const auto& weights = root.at("weights");
        if (!weights.is_array()) detail::fail("$.weights", "expected an array of numbers");
        for (std::size_t k = 0; k < weights.size(); ++k)
            s.weights.values.push_back(
                detail::as_number(weights[k], "$.weights[" + std::to_string(k) + "]"));
    }

    try {
        s.validate();
    } catch (const Error& e) {
        detail::fail("$", e.what());
    }
    return s;
}

inline json scenario_to_json(const ScenarioSpec& s) {
    json out;
    out["preset"] = s.preset;
    out["reward_dims"] = s.reward_dims;
    json questions = json::array();
    for (const auto& q : s.questions) {
        json question;
        question["actions"] = q.actions;
        question["rewards"] = q.reward_table;
        if (q.bernoulli) question["bernoulli"] = true;
        questions.push_back(std::move(question));
    }
    out["questions"] = std::move(questions);
    if (!s.conditions.empty()) {
        json conditions = json::array();
        for (const auto& c : s.conditions)
            conditions.push_back({{"gated", c.gated}, {"gate", c.gate}, {"threshold", c.threshold}});
        out["conditions"] = std::move(conditions);
    }
    if (!s.weights.values.empty()) out["weights"] = s.weights.values;
    return out;
}

/// Signature table as an array of {signature, multiplicity} entries.
inline json signature_table_to_json(const DistinctGroupResult& result) {
    json out = json::array();
    for (const auto& [sig, mult] : result.table)
        out.push_back({{"signature", sig.to_values()}, {"multiplicity", mult}});
    return out;
}

}  // namespace gdpo::io
