// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/serialization.hpp"

namespace relassess {

std::string canonical_dump(const json& value) {
    return value.dump(-1, ' ', false, json::error_handler_t::strict);
}

const json& require_field(const json& object, std::string_view field) {
    if (!object.is_object()) throw InvalidInput("expected a JSON object while reading '" + std::string(field) + "'");
    auto it = object.find(std::string(field));
    if (it == object.end() || it->is_null()) throw InvalidInput("missing field '" + std::string(field) + "'");
    return *it;
}

std::string require_string(const json& object, std::string_view field) {
    const auto& value = require_field(object, field);
    if (!value.is_string()) throw InvalidInput("field '" + std::string(field) + "' must be a string");
    return value.get<std::string>();
}

std::string optional_string(const json& object, std::string_view field, std::string fallback) {
    auto it = object.find(std::string(field));
    if (it == object.end() || it->is_null()) return fallback;
    if (!it->is_string()) throw InvalidInput("field '" + std::string(field) + "' must be a string");
    return it->get<std::string>();
}

namespace {

std::uint64_t require_uint(const json& object, std::string_view field) {
    const auto& value = require_field(object, field);
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
        throw InvalidInput("field '" + std::string(field) + "' must be a non-negative integer");
    }
    return value.get<std::uint64_t>();
}

}  // namespace

void to_json(json& j, const PairId& v) { j = json{{"query_id", v.query_id}, {"product_id", v.product_id}}; }

void from_json(const json& j, PairId& v) {
    v.query_id = require_string(j, "query_id");
    v.product_id = require_string(j, "product_id");
}

void to_json(json& j, const TokenUsage& v) {
    j = json{{"input_tokens", v.input_tokens}, {"output_tokens", v.output_tokens}};
}

void from_json(const json& j, TokenUsage& v) {
    v.input_tokens = require_uint(j, "input_tokens");
    v.output_tokens = require_uint(j, "output_tokens");
}

void to_json(json& j, const QueryContext& v) {
    j = json{{"query_id", v.query_id},
             {"query_text", v.query_text},
             {"language", v.language},
             {"market", v.market},
             {"search_engine_id", v.search_engine_id}};
    j["gender_filter"] = v.gender_filter ? json(to_string(*v.gender_filter)) : json(nullptr);
}

void from_json(const json& j, QueryContext& v) {
    v.query_id = require_string(j, "query_id");
    v.query_text = require_string(j, "query_text");
    v.language = require_string(j, "language");
    v.market = optional_string(j, "market");
    v.search_engine_id = optional_string(j, "search_engine_id");
    auto gender = optional_string(j, "gender_filter");
    v.gender_filter = gender.empty() ? std::nullopt : std::optional(parse_enum<GenderFilter>(gender));
}

void to_json(json& j, const Requirement& v) {
    j = json{{"name", v.name}, {"value", v.value}, {"importance", to_string(v.importance)}, {"reason", v.reason}};
}

void from_json(const json& j, Requirement& v) {
    v.name = require_string(j, "name");
    v.value = require_string(j, "value");
    v.importance = require_enum<Importance>(j, "importance");
    v.reason = optional_string(j, "reason");
}

void to_json(json& j, const QueryAnalysis& v) {
    j = json{{"query_id", v.query_id},
             {"translated_query", v.translated_query},
             {"specificity", to_string(v.specificity)},
             {"requirements", v.requirements},
             {"reasoning", v.reasoning},
             {"model_id", v.model_id},
             {"prompt_version", v.prompt_version}};
}

void from_json(const json& j, QueryAnalysis& v) {
    v.query_id = optional_string(j, "query_id");
    v.translated_query = require_string(j, "translated_query");
    v.specificity = require_enum<Specificity>(j, "specificity");
    const auto& reqs = require_field(j, "requirements");
    if (!reqs.is_array()) throw InvalidInput("field 'requirements' must be an array");
    v.requirements.clear();
    for (const auto& r : reqs) v.requirements.push_back(r.get<Requirement>());
    v.reasoning = optional_string(j, "reasoning");
    v.model_id = optional_string(j, "model_id");
    v.prompt_version = optional_string(j, "prompt_version");
}

void to_json(json& j, const GuidelineSet& v) {
    json criteria = json::object();
    for (auto label : all_values<RelevanceLabel>()) criteria[std::string(to_string(label))] = v.criterion(label);
    j = json{{"query_id", v.query_id},
             {"kind", to_string(v.kind)},
             {"criteria", criteria},
             {"model_id", v.model_id},
             {"prompt_version", v.prompt_version}};
}

void from_json(const json& j, GuidelineSet& v) {
    v.query_id = require_string(j, "query_id");
    v.kind = require_enum<GuidelineKind>(j, "kind");
    const auto& criteria = require_field(j, "criteria");
    for (auto label : all_values<RelevanceLabel>()) {
        v.criteria[static_cast<std::size_t>(label)] = require_string(criteria, to_string(label));
    }
    v.model_id = optional_string(j, "model_id");
    v.prompt_version = optional_string(j, "prompt_version");
}

void to_json(json& j, const ProductRecord& v) {
    json attributes = json::array();
    for (const auto& [key, value] : v.attributes) attributes.push_back(json::array({key, value}));
    j = json{{"product_id", v.product_id},
             {"title", v.title},
             {"attributes", attributes},
             {"description", v.description}};
    j["image_ref"] = v.image_ref ? json(*v.image_ref) : json(nullptr);
}

void from_json(const json& j, ProductRecord& v) {
    v.product_id = require_string(j, "product_id");
    v.title = optional_string(j, "title");
    v.description = optional_string(j, "description");
    v.attributes.clear();
    if (auto it = j.find("attributes"); it != j.end() && !it->is_null()) {
        if (it->is_object()) {
            for (const auto& [key, value] : it->items()) {
                if (!value.is_string()) throw InvalidInput("attribute '" + key + "' must be a string");
                v.attributes.emplace_back(key, value.get<std::string>());
            }
        } else if (it->is_array()) {
            for (const auto& kv : *it) {
                if (!kv.is_array() || kv.size() != 2 || !kv[0].is_string() || !kv[1].is_string()) {
                    throw InvalidInput("attributes must be [key, value] string pairs");
                }
                v.attributes.emplace_back(kv[0].get<std::string>(), kv[1].get<std::string>());
            }
        } else {
            throw InvalidInput("field 'attributes' must be an object or an array of pairs");
        }
    }
    auto image = optional_string(j, "image_ref");
    v.image_ref = image.empty() ? std::nullopt : std::optional(image);
}

void to_json(json& j, const JudgmentSource& v) {
    if (const auto* human = std::get_if<HumanSource>(&v)) {
        j = json{{"kind", "human"}, {"group", human->annotator_group}};
    } else {
        const auto& llm = std::get<LlmSource>(v);
        j = json{{"kind", "llm"}, {"model_id", llm.model_id}, {"variant", to_string(llm.variant)}};
    }
}

void from_json(const json& j, JudgmentSource& v) {
    const auto kind = require_string(j, "kind");
    if (kind == "human") {
        if (j.contains("variant")) throw InvalidInput("human judgment sources must not carry a variant");
        v = HumanSource{require_string(j, "group")};
    } else if (kind == "llm") {
        v = LlmSource{require_string(j, "model_id"), require_enum<Variant>(j, "variant")};
    } else {
        throw InvalidInput("unknown judgment source kind '" + kind + "'");
    }
}

void to_json(json& j, const Judgment& v) {
    j = json{{"pair_id", v.pair_id}, {"source", v.source}, {"label", to_string(v.label)}, {"created_at", v.created_at}};
    if (v.reasoning) j["reasoning"] = *v.reasoning;
    if (v.usage) j["usage"] = *v.usage;
    if (v.wall_time_ms) j["wall_time_ms"] = *v.wall_time_ms;
}

void from_json(const json& j, Judgment& v) {
    v.pair_id = require_field(j, "pair_id").get<PairId>();
    v.source = require_field(j, "source").get<JudgmentSource>();
    v.label = require_enum<RelevanceLabel>(j, "label");
    v.created_at = optional_string(j, "created_at");
    v.reasoning.reset();
    v.usage.reset();
    v.wall_time_ms.reset();
    if (auto it = j.find("reasoning"); it != j.end() && !it->is_null()) v.reasoning = it->get<std::string>();
    if (auto it = j.find("usage"); it != j.end() && !it->is_null()) v.usage = it->get<TokenUsage>();
    if (j.contains("wall_time_ms") && !j["wall_time_ms"].is_null()) v.wall_time_ms = require_uint(j, "wall_time_ms");
}

void to_json(json& j, const AnnotationSet& v) {
    j = json{{"pair_id", v.pair_id}};
    j["a1"] = v.a1 ? json(to_string(*v.a1)) : json(nullptr);
    j["a2"] = v.a2 ? json(to_string(*v.a2)) : json(nullptr);
    if (v.tiebreaker) j["tiebreaker"] = to_string(*v.tiebreaker);
    if (!v.llm_judgments.empty()) j["llm_judgments"] = v.llm_judgments;
}

void from_json(const json& j, AnnotationSet& v) {
    v.pair_id = require_field(j, "pair_id").get<PairId>();
    auto label = [&](const char* field) -> std::optional<RelevanceLabel> {
        auto text = optional_string(j, field);
        if (text.empty()) return std::nullopt;
        return parse_enum<RelevanceLabel>(text);
    };
    v.a1 = label("a1");
    v.a2 = label("a2");
    v.tiebreaker = label("tiebreaker");
    v.llm_judgments.clear();
    if (auto it = j.find("llm_judgments"); it != j.end() && it->is_array()) {
        for (const auto& item : *it) v.llm_judgments.push_back(item.get<Judgment>());
    }
    validate(v);
}

}  // namespace relassess
