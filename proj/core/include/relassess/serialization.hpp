// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "relassess/model.hpp"

namespace relassess {

using json = nlohmann::json;

// Canonical form: UTF-8, keys sorted, no insignificant whitespace. Every
// digest in the system is taken over this form.
std::string canonical_dump(const json& value);

// Typed field access that reports the missing/mistyped field by name.
const json& require_field(const json& object, std::string_view field);
std::string require_string(const json& object, std::string_view field);
std::string optional_string(const json& object, std::string_view field, std::string fallback = {});

template <typename E>
E require_enum(const json& object, std::string_view field) {
    return parse_enum<E>(require_string(object, field));
}

void to_json(json& j, const PairId& v);
void from_json(const json& j, PairId& v);
void to_json(json& j, const TokenUsage& v);
void from_json(const json& j, TokenUsage& v);
void to_json(json& j, const QueryContext& v);
void from_json(const json& j, QueryContext& v);
void to_json(json& j, const Requirement& v);
void from_json(const json& j, Requirement& v);
void to_json(json& j, const QueryAnalysis& v);
void from_json(const json& j, QueryAnalysis& v);
void to_json(json& j, const GuidelineSet& v);
void from_json(const json& j, GuidelineSet& v);
void to_json(json& j, const ProductRecord& v);
void from_json(const json& j, ProductRecord& v);
void to_json(json& j, const JudgmentSource& v);
void from_json(const json& j, JudgmentSource& v);
void to_json(json& j, const Judgment& v);
void from_json(const json& j, Judgment& v);
void to_json(json& j, const AnnotationSet& v);
void from_json(const json& j, AnnotationSet& v);

}  // namespace relassess
