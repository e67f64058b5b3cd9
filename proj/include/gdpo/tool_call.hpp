#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gdpo/errors.hpp"

namespace gdpo {

/// One tool invocation: a name plus a JSON object of parameters.
struct ToolCall {
    std::string name;
    nlohmann::json parameters = nlohmann::json::object();

    void validate() const {
        if (name.empty()) throw InvalidInputError("ToolCall: empty name");
        if (!parameters.is_object()) throw InvalidInputError("ToolCall: parameters must be an object");
    }
};

enum class BlockType { think, tool_call, response };

inline const char* block_tag(BlockType t) {
    switch (t) {
        case BlockType::think: return "think";
        case BlockType::tool_call: return "tool_call";
        case BlockType::response: return "response";
    }
    return "";
}

/// A response split into its tag-delimited blocks. Parsing is best-effort:
/// blocks are extracted even from malformed documents, while
/// `tags_well_formed` records whether every opened tag closed cleanly with
/// no nesting and no stray close tags.
struct StructuredResponse {
    std::string raw;
    struct Block {
        BlockType type;
        std::string content;
    };
    std::vector<Block> blocks;
    bool tags_well_formed = true;

    static StructuredResponse parse(std::string_view text);
};

namespace detail {

struct TagToken {
    std::size_t pos;
    std::size_t end;
    BlockType type;
    bool closing;
};

inline bool next_tag(std::string_view text, std::size_t from, TagToken& out) {
    static constexpr std::pair<std::string_view, std::pair<BlockType, bool>> kTags[] = {
        {"<think>", {BlockType::think, false}},
        {"</think>", {BlockType::think, true}},
        {"<tool_call>", {BlockType::tool_call, false}},
        {"</tool_call>", {BlockType::tool_call, true}},
        {"<response>", {BlockType::response, false}},
        {"</response>", {BlockType::response, true}},
    };
    bool found = false;
    for (const auto& [literal, info] : kTags) {
        const auto pos = text.find(literal, from);
        if (pos == std::string_view::npos) continue;
        // Longest match wins at equal positions so "</think>" is never
        // shadowed; distinct literals cannot actually tie, but "<t..."
        // prefix overlaps are resolved by position first.
        if (!found || pos < out.pos || (pos == out.pos && literal.size() > out.end - out.pos)) {
            out = TagToken{pos, pos + literal.size(), info.first, info.second};
            found = true;
        }
    }
    return found;
}

}  // namespace detail

inline StructuredResponse StructuredResponse::parse(std::string_view text) {
    StructuredResponse r;
    r.raw = std::string(text);

    std::size_t cursor = 0;
    detail::TagToken tok;
    while (detail::next_tag(text, cursor, tok)) {
        if (tok.closing) {
            // Stray close tag with no matching open.
            r.tags_well_formed = false;
            cursor = tok.end;
            continue;
        }
        const BlockType open_type = tok.type;
        const std::size_t content_begin = tok.end;
        std::size_t scan = tok.end;
        bool closed = false;
        // Walk to the matching close tag; any other tag in between means
        // nesting and taints well-formedness but stays part of the content.
        detail::TagToken inner;
        while (detail::next_tag(text, scan, inner)) {
            if (inner.closing && inner.type == open_type) {
                r.blocks.push_back({open_type,
                                    std::string(text.substr(content_begin, inner.pos - content_begin))});
                cursor = inner.end;
                closed = true;
                break;
            }
            r.tags_well_formed = false;
            scan = inner.end;
        }
        if (!closed) {
            // Unterminated block: drop it.
            r.tags_well_formed = false;
            cursor = text.size();
        }
    }
    return r;
}

/// Binary structural reward: 1 iff exactly one think block leads the
/// response, at least one tool_call or response block follows, every
/// tool_call precedes any response, and all tags close cleanly.
inline int format_reward(const StructuredResponse& r) {
    if (!r.tags_well_formed) return 0;

    int think_count = 0, tool_count = 0, response_count = 0;
    bool seen_response = false;
    for (std::size_t i = 0; i < r.blocks.size(); ++i) {
        switch (r.blocks[i].type) {
            case BlockType::think:
                ++think_count;
                if (i != 0) return 0;  // think must precede all other blocks
                break;
            case BlockType::tool_call:
                ++tool_count;
                if (seen_response) return 0;  // tool_call after response
                break;
            case BlockType::response:
                ++response_count;
                seen_response = true;
                break;
        }
    }
    if (think_count != 1) return 0;
    if (tool_count + response_count == 0) return 0;
    return 1;
}

inline int format_reward(std::string_view text) {
    return format_reward(StructuredResponse::parse(text));
}

struct ParsedToolCalls {
    std::vector<ToolCall> calls;
    int parse_failures = 0;
};

/// Extracts tool calls from every tool_call block, one JSON object per
/// line. Unparseable lines are skipped and counted, never fatal.
inline ParsedToolCalls parse_tool_calls(const StructuredResponse& r) {
    ParsedToolCalls out;
    for (const auto& block : r.blocks) {
        if (block.type != BlockType::tool_call) continue;
        std::size_t start = 0;
        const std::string& content = block.content;
        while (start <= content.size()) {
            std::size_t eol = content.find('\n', start);
            if (eol == std::string::npos) eol = content.size();
            std::string_view line(content.data() + start, eol - start);
            start = eol + 1;

            // trim
            while (!line.empty() && (line.front() == ' ' || line.front() == '\t' || line.front() == '\r'))
                line.remove_prefix(1);
            while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
                line.remove_suffix(1);
            if (line.empty()) continue;

            const auto parsed = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
            if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("name") ||
                !parsed["name"].is_string() || parsed["name"].get<std::string>().empty() ||
                !parsed.contains("parameters") || !parsed["parameters"].is_object() ||
                parsed.size() != 2) {
                ++out.parse_failures;
                continue;
            }
            out.calls.push_back({parsed["name"].get<std::string>(), parsed["parameters"]});
        }
    }
    return out;
}

inline ParsedToolCalls parse_tool_calls(std::string_view text) {
    return parse_tool_calls(StructuredResponse::parse(text));
}

}  // namespace gdpo
