// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "relassess/errors.hpp"

namespace relassess {

// Three-point relevance scale. The underlying values are ordinal positions
// and are used directly for distance computations.
enum class RelevanceLabel : std::uint8_t { irrelevant = 0, acceptable_substitute = 1, highly_relevant = 2 };

enum class GenderFilter : std::uint8_t { women, men, unisex, none };
enum class Importance : std::uint8_t { must_have, approximate_is_okay, nice_to_have };
enum class Specificity : std::uint8_t { broad, specific, exact_product };
enum class GuidelineKind : std::uint8_t { query_specific, generic };
enum class Variant : std::uint8_t { llm_text, mllm_text, mllm_multi };

// Canonical lowercase snake_case names, indexed by enum value. These strings
// are part of every on-disk format and cache key.
template <typename E>
struct EnumNames;

template <>
struct EnumNames<RelevanceLabel> {
    static constexpr std::string_view type_name = "RelevanceLabel";
    static constexpr std::array<std::string_view, 3> names = {"irrelevant", "acceptable_substitute",
                                                              "highly_relevant"};
};
template <>
struct EnumNames<GenderFilter> {
    static constexpr std::string_view type_name = "GenderFilter";
    static constexpr std::array<std::string_view, 4> names = {"women", "men", "unisex", "none"};
};
template <>
struct EnumNames<Importance> {
    static constexpr std::string_view type_name = "Importance";
    static constexpr std::array<std::string_view, 3> names = {"must_have", "approximate_is_okay",
                                                              "nice_to_have"};
};
template <>
struct EnumNames<Specificity> {
    static constexpr std::string_view type_name = "Specificity";
    static constexpr std::array<std::string_view, 3> names = {"broad", "specific", "exact_product"};
};
template <>
struct EnumNames<GuidelineKind> {
    static constexpr std::string_view type_name = "GuidelineKind";
    static constexpr std::array<std::string_view, 2> names = {"query_specific", "generic"};
};
template <>
struct EnumNames<Variant> {
    static constexpr std::string_view type_name = "Variant";
    static constexpr std::array<std::string_view, 3> names = {"llm_text", "mllm_text", "mllm_multi"};
};

template <typename E>
constexpr std::string_view to_string(E value) {
    return EnumNames<E>::names[static_cast<std::size_t>(value)];
}

template <typename E>
constexpr std::optional<E> try_parse_enum(std::string_view text) {
    const auto& names = EnumNames<E>::names;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == text) return static_cast<E>(i);
    }
    return std::nullopt;
}

template <typename E>
E parse_enum(std::string_view text) {
    if (auto value = try_parse_enum<E>(text)) return *value;
    throw InvalidInput("unknown " + std::string(EnumNames<E>::type_name) + " value '" +
                       std::string(text) + "'");
}

template <typename E>
constexpr auto all_values() {
    std::array<E, EnumNames<E>::names.size()> out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<E>(i);
    return out;
}

inline constexpr std::string_view kGenericGuidelineId = "GENERIC";

struct PairId {
    std::string query_id;
    std::string product_id;

    auto operator<=>(const PairId&) const = default;
    bool operator==(const PairId&) const = default;
};

std::string to_string(const PairId& id);

struct TokenUsage {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& other) {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
    friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
    bool operator==(const TokenUsage&) const = default;
};

struct QueryContext {
    std::string query_id;
    std::string query_text;
    std::string language;  // ISO-639-1
    std::string market;
    std::optional<GenderFilter> gender_filter;
    std::string search_engine_id;

    bool operator==(const QueryContext&) const = default;
};

struct Requirement {
    std::string name;
    std::string value;
    Importance importance = Importance::must_have;
    std::string reason;

    bool operator==(const Requirement&) const = default;
};

struct QueryAnalysis {
    std::string query_id;
    std::string translated_query;
    Specificity specificity = Specificity::broad;
    std::vector<Requirement> requirements;
    std::string reasoning;  // chain-of-thought, kept for debugging
    std::string model_id;
    std::string prompt_version;

    bool operator==(const QueryAnalysis&) const = default;
};

struct GuidelineSet {
    std::string query_id;  // kGenericGuidelineId for generic sets
    GuidelineKind kind = GuidelineKind::query_specific;
    std::array<std::string, 3> criteria;  // indexed by RelevanceLabel
    std::string model_id;
    std::string prompt_version;

    [[nodiscard]] const std::string& criterion(RelevanceLabel label) const {
        return criteria[static_cast<std::size_t>(label)];
    }
    bool operator==(const GuidelineSet&) const = default;
};

struct ProductRecord {
    std::string product_id;
    std::string title;
    std::vector<std::pair<std::string, std::string>> attributes;  // insertion ordered
    std::string description;
    std::optional<std::string> image_ref;

    bool operator==(const ProductRecord&) const = default;
};

struct HumanSource {
    std::string annotator_group;
    bool operator==(const HumanSource&) const = default;
};

struct LlmSource {
    std::string model_id;
    Variant variant = Variant::llm_text;
    bool operator==(const LlmSource&) const = default;
};

using JudgmentSource = std::variant<HumanSource, LlmSource>;

// "llm:<model>:<variant>" or "human:<group>"; used as a report row key.
std::string source_name(const JudgmentSource& source);

struct Judgment {
    PairId pair_id;
    JudgmentSource source;
    RelevanceLabel label = RelevanceLabel::irrelevant;
    std::optional<std::string> reasoning;
    std::optional<TokenUsage> usage;
    std::optional<std::uint64_t> wall_time_ms;
    std::string created_at;  // ISO-8601 UTC

    [[nodiscard]] std::optional<Variant> variant() const;
    bool operator==(const Judgment&) const = default;
};

struct AnnotationSet {
    PairId pair_id;
    std::optional<RelevanceLabel> a1;
    std::optional<RelevanceLabel> a2;
    std::optional<RelevanceLabel> tiebreaker;
    std::vector<Judgment> llm_judgments;

    bool operator==(const AnnotationSet&) const = default;
};

// Label algebra.

// Equal primary annotations win regardless of the tiebreaker; otherwise the
// tiebreaker decides. Throws UnresolvedVote when a1 != a2 and no tiebreaker.
RelevanceLabel majority_vote(RelevanceLabel a1, RelevanceLabel a2, std::optional<RelevanceLabel> tiebreaker);

// Majority for a stored annotation set; nullopt when a label is missing or the
// vote is unresolved.
std::optional<RelevanceLabel> try_majority(const AnnotationSet& annotations);

constexpr int label_distance(RelevanceLabel x, RelevanceLabel y) {
    const int d = static_cast<int>(x) - static_cast<int>(y);
    return d < 0 ? -d : d;
}

constexpr bool is_hard_disagreement(RelevanceLabel x, RelevanceLabel y) {
    return (x == RelevanceLabel::irrelevant && y == RelevanceLabel::highly_relevant) ||
           (x == RelevanceLabel::highly_relevant && y == RelevanceLabel::irrelevant);
}

// Validation of the type invariants. Each throws InvalidInput naming the
// violated field.
void validate(const QueryContext& ctx, const std::vector<std::string>& supported_languages);
void validate(const Requirement& requirement);
void validate(const QueryAnalysis& analysis);
void validate(const GuidelineSet& guidelines);
void validate(const Judgment& judgment);
void validate(const AnnotationSet& annotations);

// Current UTC time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string utc_now_iso();

std::string trim(std::string_view text);

}  // namespace relassess
