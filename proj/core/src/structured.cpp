// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

// Structured-output extraction for model responses.

#include <optional>

#include "relassess/gateway.hpp"

namespace relassess {

namespace {

constexpr std::size_t kMaxFragment = 240;

std::string clip(std::string_view text) {
    if (text.size() <= kMaxFragment) return std::string(text);
    return std::string(text.substr(0, kMaxFragment)) + "...";
}

// End index (inclusive) of the balanced object starting at `open`, honoring
// string literals and escapes.
std::optional<std::size_t> matching_brace(std::string_view text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::nullopt;
}

std::string nonempty_string(const json& object, const char* field) {
    auto it = object.find(field);
    if (it == object.end() || !it->is_string()) throw InvalidInput(std::string("missing string field '") + field + "'");
    auto value = it->get<std::string>();
    if (trim(value).empty()) throw InvalidInput(std::string("field '") + field + "' is empty");
    return value;
}

std::string string_or_empty(const json& object, const char* field) {
    auto it = object.find(field);
    if (it == object.end() || it->is_null()) return {};
    if (!it->is_string()) throw InvalidInput(std::string("field '") + field + "' must be a string");
    return it->get<std::string>();
}

template <typename E>
std::string enum_field(const json& object, const char* field) {
    const auto value = nonempty_string(object, field);
    if (!try_parse_enum<E>(value)) {
        throw InvalidInput(std::string("field '") + field + "' has out-of-vocabulary value '" + value + "'");
    }
    return value;
}

json normalize_query_analysis(const json& object) {
    json out{{"translated_query", nonempty_string(object, "translated_query")},
             {"specificity", enum_field<Specificity>(object, "specificity")},
             {"reasoning", string_or_empty(object, "reasoning")}};
    auto it = object.find("requirements");
    if (it == object.end() || !it->is_array() || it->empty()) throw InvalidInput("'requirements' must be a non-empty array");
    json requirements = json::array();
    for (const auto& r : *it) {
        if (!r.is_object()) throw InvalidInput("requirement entries must be objects");
        requirements.push_back({{"name", nonempty_string(r, "name")},
                                {"value", nonempty_string(r, "value")},
                                {"importance", enum_field<Importance>(r, "importance")},
                                {"reason", string_or_empty(r, "reason")}});
    }
    out["requirements"] = std::move(requirements);
    return out;
}

json normalize_guideline_set(const json& object) {
    const json* criteria = &object;
    if (auto it = object.find("criteria"); it != object.end() && it->is_object()) criteria = &*it;
    json out = json::object();
    for (auto label : all_values<RelevanceLabel>()) {
        const std::string name(to_string(label));
        out[name] = nonempty_string(*criteria, name.c_str());
    }
    return json{{"criteria", out}};
}

json normalize_visual_description(const json& object) {
    return json{{"description", nonempty_string(object, "description")}};
}

json normalize_judgment(const json& object) {
    json out{{"label", enum_field<RelevanceLabel>(object, "label")}};
    std::string reasoning = string_or_empty(object, "reasoning");
    if (reasoning.empty()) reasoning = string_or_empty(object, "reason");
    out["reasoning"] = reasoning;
    return out;
}

using Normalizer = json (*)(const json&);

Normalizer normalizer_for(std::string_view schema_id) {
    if (schema_id == kSchemaQueryAnalysis) return normalize_query_analysis;
    if (schema_id == kSchemaGuidelineSet) return normalize_guideline_set;
    if (schema_id == kSchemaVisualDescription) return normalize_visual_description;
    if (schema_id == kSchemaJudgment) return normalize_judgment;
    return nullptr;
}

}  // namespace

json parse_structured(std::string_view raw_text, std::string_view response_schema_id) {
    const Normalizer normalize = normalizer_for(response_schema_id);
    if (normalize == nullptr) {
        throw SchemaViolation("unregistered response schema '" + std::string(response_schema_id) + "'", "");
    }
    std::string first_problem;
    std::string first_fragment;
    for (std::size_t open = raw_text.find('{'); open != std::string_view::npos; open = raw_text.find('{', open + 1)) {
        const auto close = matching_brace(raw_text, open);
        if (!close) continue;
        const auto candidate = raw_text.substr(open, *close - open + 1);
        json parsed = json::parse(candidate, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded() || !parsed.is_object()) continue;
        try {
            return normalize(parsed);
        } catch (const InvalidInput& e) {
            if (first_problem.empty()) {
                first_problem = e.what();
                first_fragment = clip(candidate);
            }
        }
    }
    if (!first_problem.empty()) {
        throw SchemaViolation("response does not match schema '" + std::string(response_schema_id) + "': " + first_problem,
                              first_fragment);
    }
    throw SchemaViolation("response contains no JSON object for schema '" + std::string(response_schema_id) + "'",
                          clip(raw_text));
}

}  // namespace relassess
